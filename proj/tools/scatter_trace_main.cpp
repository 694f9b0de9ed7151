#include "CLI11.hpp"
#include "scatter_trace/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral densities, regularized traces and Casimir "
                 "energies from scattering matrices"};
    app.require_subcommand(1);

    scatter_trace::CliOptions opt;
    const char* names[] = {"scatter1d", "trace1d",  "casimir1d", "scatter3d",
                           "casimir3d", "validate", "gamma-demo"};
    const char* blurbs[] = {
        "1D reflection/transmission data on a k-grid",
        "1D trace via the S-matrix and reflection-dispersion routes",
        "1D Casimir energy (non-singular double integral)",
        "partial-wave phase shifts and the S-operator file",
        "three-term 3D Casimir energy",
        "mode-sum oracle vs trace formula",
        "regularized Gamma product vs reference",
    };
    for (int i = 0; i < 7; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", opt.config_path, "JSON run configuration")
            ->required();
        sub->add_option("--out", opt.out_dir, "output directory override");
        sub->add_flag("--emit-integrand", opt.emit_integrand,
                      "also write the density-of-states integrand CSV");
        sub->callback([&, i]() { opt.task = names[i]; });
    }

    CLI11_PARSE(app, argc, argv);
    return scatter_trace::run_cli(opt);
}
