#include "scatter_trace/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "scatter_trace/boxsim.hpp"
#include "scatter_trace/errors.hpp"
#include "scatter_trace/pvmath.hpp"
#include "scatter_trace/scatter1d.hpp"
#include "scatter_trace/scatter3d.hpp"
#include "scatter_trace/trace1d.hpp"
#include "scatter_trace/trace3d.hpp"

namespace scatter_trace {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
    std::string task;
    std::optional<PotentialModel> potential;
    std::optional<WeightFunction> phi;
    std::vector<double> kgrid;
    json tolerances;
    int l_max = -1;
    std::vector<double> boxes;
    int n_max = 0;
    double k_cut = 0.0;
    std::string input_path;
    std::string born_csv;
    std::string format = "compact";
    fs::path out_dir;

    double tol(const std::string& name, double dflt) const {
        if (tolerances.contains(name)) return tolerances.at(name).get<double>();
        return dflt;
    }
};

std::vector<double> build_kgrid(const json& j) {
    double k_min = j.at("k_min").get<double>();
    double k_max = j.at("k_max").get<double>();
    int count = j.at("count").get<int>();
    std::string spacing = j.value("spacing", "linear");
    if (!(k_min > 0.0) || !(k_min < k_max))
        throw ConfigError("kgrid: need 0 < k_min < k_max");
    if (count < 16) throw ConfigError("kgrid: count must be >= 16");
    std::vector<double> ks(count);
    for (int i = 0; i < count; ++i) {
        double t = static_cast<double>(i) / (count - 1);
        ks[i] = spacing == "log" ? k_min * std::pow(k_max / k_min, t)
                                 : k_min + (k_max - k_min) * t;
    }
    if (spacing != "log" && spacing != "linear")
        throw ConfigError("kgrid: spacing must be \"linear\" or \"log\"");
    return ks;
}

RunConfig parse_config(const CliOptions& opt) {
    std::ifstream f(opt.config_path);
    if (!f) throw ConfigError("cannot open config " + opt.config_path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    RunConfig cfg;
    try {
        cfg.task = !opt.task.empty() ? opt.task : j.value("task", "");
        if (cfg.task.empty())
            throw ConfigError("no task: pass a subcommand or set \"task\"");
        if (j.contains("potential"))
            cfg.potential = PotentialModel::from_json(j.at("potential"));
        if (j.contains("phi")) cfg.phi = WeightFunction::from_json(j.at("phi"));
        if (j.contains("kgrid")) cfg.kgrid = build_kgrid(j.at("kgrid"));
        cfg.tolerances = j.value("tolerances", json::object());
        cfg.l_max = j.value("l_max", -1);
        if (j.contains("boxes"))
            cfg.boxes = j.at("boxes").get<std::vector<double>>();
        cfg.n_max = j.value("n_max", 0);
        cfg.k_cut = j.value("k_cut", 0.0);
        const json io = j.value("io", json::object());
        cfg.input_path = io.value("input", "");
        cfg.born_csv = io.value("born_integral_csv", "");
        cfg.format = io.value("format", "compact");
        cfg.out_dir = !opt.out_dir.empty() ? fs::path(opt.out_dir)
                                           : fs::path(io.value("output_dir",
                                                               "out"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    // referenced files must exist and parse before any computation starts
    for (const std::string& p : {cfg.input_path, cfg.born_csv}) {
        if (!p.empty() && !fs::exists(p))
            throw ConfigError("referenced file does not exist: " + p);
    }
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("cannot create output dir " +
                              cfg.out_dir.string());
    return cfg;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << text;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void summary(const std::string& task, double total, double error) {
    std::cout << "task=" << task << " total=" << fmt(total)
              << " error=" << fmt(error) << "\n";
}

std::vector<ScatterData1D> get_1d_data(const RunConfig& cfg) {
    if (!cfg.input_path.empty())
        return load_scatter1d_csv(cfg.input_path,
                                  cfg.tol("unitarity", 1e-6));
    if (!cfg.potential)
        throw ConfigError("task needs a \"potential\" or io.input data");
    if (cfg.kgrid.empty()) throw ConfigError("task needs a \"kgrid\"");
    return solve_grid(*cfg.potential, cfg.kgrid, cfg.tol("solver", 1e-10));
}

void emit_integrand_csv(const fs::path& dir,
                        std::span<const ScatterData1D> data) {
    std::ostringstream os;
    os << "k,rho\n";
    for (const auto& [k, rho] : density_of_states(data))
        os << fmt(k) << "," << fmt(rho) << "\n";
    write_text(dir / "integrand.csv", os.str());
}

int task_scatter1d(const RunConfig& cfg, const CliOptions& opt) {
    auto data = get_1d_data(cfg);
    save_scatter1d_csv((cfg.out_dir / "scatter1d.csv").string(), data);
    if (opt.emit_integrand) emit_integrand_csv(cfg.out_dir, data);
    double worst = 0.0;
    for (const auto& d : data) worst = std::max(worst, d.unitarity_defect());
    summary("scatter1d", static_cast<double>(data.size()), worst);
    return 0;
}

int task_trace1d(const RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.phi) throw ConfigError("trace1d needs a \"phi\"");
    auto data = get_1d_data(cfg);
    TraceResult direct = trace_direct(data, *cfg.phi);
    TraceResult refl = trace_reflection(data, *cfg.phi);
    json out;
    out["direct"] = direct.to_json();
    out["reflection"] = refl.to_json();
    out["route_gap"] = std::abs(direct.value - refl.value);
    write_text(cfg.out_dir / "trace1d.json", out.dump(1) + "\n");
    if (opt.emit_integrand) emit_integrand_csv(cfg.out_dir, data);
    summary("trace1d", direct.value, direct.quadrature_error);
    return 0;
}

int task_casimir1d(const RunConfig& cfg, const CliOptions& opt) {
    auto data = get_1d_data(cfg);
    TraceResult res = casimir_energy_1d(data);
    write_text(cfg.out_dir / "casimir1d.json", res.to_json().dump(1) + "\n");
    if (opt.emit_integrand) emit_integrand_csv(cfg.out_dir, data);
    summary("casimir1d", res.value, res.quadrature_error);
    return 0;
}

int task_scatter3d(const RunConfig& cfg, const CliOptions&) {
    if (!cfg.potential) throw ConfigError("scatter3d needs a \"potential\"");
    if (cfg.kgrid.empty()) throw ConfigError("scatter3d needs a \"kgrid\"");
    auto spectra = phase_shifts_grid(*cfg.potential, cfg.kgrid, cfg.l_max,
                                     cfg.tol("solver", 1e-8));
    double unit_tol = cfg.tol("unitarity", 1e-6);
    if (cfg.format == "matrix") {
        std::vector<SOperator> ops;
        ops.reserve(spectra.size());
        for (const auto& sp : spectra) ops.push_back(soperator_from_phases(sp));
        save_soperator((cfg.out_dir / "soperator.json").string(), ops,
                       unit_tol);
    } else {
        save_soperator_compact((cfg.out_dir / "soperator.json").string(),
                               spectra, unit_tol);
    }
    std::ostringstream os;
    os << "k,sigma_bar,arg_det1,eta0\n";
    for (const auto& sp : spectra)
        os << fmt(sp.k) << "," << fmt(cross_section(sp).sigma_bar) << ","
           << fmt(log_det1(sp).imag()) << "," << fmt(sp.channels[0].eta)
           << "\n";
    write_text(cfg.out_dir / "scatter3d.csv", os.str());
    summary("scatter3d", static_cast<double>(spectra.size()),
            std::abs(spectra.back().channels.back().eta));
    return 0;
}

std::vector<double> load_born_csv(const std::string& path,
                                  std::span<const double> kgrid) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    std::string line;
    std::getline(f, line);  // header
    std::vector<double> ks, bs;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        ks.push_back(std::stod(a));
        bs.push_back(std::stod(b));
    }
    if (ks.size() != kgrid.size())
        throw ConfigError(path + ": born table must match the S-operator "
                          "k-grid");
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (std::abs(ks[i] - kgrid[i]) > 1e-9 * (1.0 + std::abs(kgrid[i])))
            throw ConfigError(path + ": born table k-grid mismatch");
    return bs;
}

int task_casimir3d(const RunConfig& cfg, const CliOptions&) {
    DispersionInputs inputs;
    if (!cfg.input_path.empty()) {
        SOperatorFile file = load_soperator(cfg.input_path);
        if (cfg.born_csv.empty())
            throw ConfigError(
                "ingested S-operator data needs io.born_integral_csv (the "
                "potential integral is not recoverable from S)");
        std::vector<double> ks;
        for (const auto& sp : file.spectra) ks.push_back(sp.k);
        inputs = dispersion_inputs_from_spectra(
            file.spectra, load_born_csv(cfg.born_csv, ks));
    } else {
        if (!cfg.potential || cfg.kgrid.empty())
            throw ConfigError("casimir3d needs potential+kgrid or io.input");
        inputs = build_dispersion_inputs(*cfg.potential, cfg.kgrid, cfg.l_max,
                                         cfg.tol("solver", 1e-8));
    }
    Casimir3dResult res = casimir_energy_3d(inputs);
    write_text(cfg.out_dir / "casimir3d.json", res.to_json().dump(1) + "\n");
    summary("casimir3d", res.trace.value, res.trace.quadrature_error);
    return 0;
}

int task_validate(const RunConfig& cfg, const CliOptions&) {
    if (!cfg.potential || !cfg.phi)
        throw ConfigError("validate needs \"potential\" and \"phi\"");
    if (cfg.kgrid.empty()) throw ConfigError("validate needs a \"kgrid\"");
    std::vector<double> boxes =
        cfg.boxes.empty() ? std::vector<double>{50.0, 100.0, 200.0}
                          : cfg.boxes;
    int n_max = cfg.n_max;
    if (n_max == 0) {
        double k_need = std::min(cfg.phi->support_limit(), cfg.kgrid.back());
        n_max = static_cast<int>(std::ceil(2.0 * boxes.back() * k_need /
                                           M_PI)) + 8;
    }

    auto data = solve_grid(*cfg.potential, cfg.kgrid,
                           cfg.tol("solver", 1e-10));
    TraceResult direct = trace_direct(data, *cfg.phi);
    ModeSumResult ms = mode_sum(*cfg.potential, *cfg.phi, boxes, n_max,
                                cfg.tol("box", 1e-6));

    std::ostringstream os;
    os << "L,mode_sum,trace_direct,relative_gap\n";
    for (const auto& [L, s] : ms.per_length)
        os << fmt(L) << "," << fmt(s) << "," << fmt(direct.value) << ","
           << fmt(std::abs(s - direct.value) /
                  std::max(std::abs(direct.value), 1e-300))
           << "\n";
    double gap = std::abs(ms.value - direct.value) /
                 std::max(std::abs(direct.value), 1e-300);
    os << "inf," << fmt(ms.value) << "," << fmt(direct.value) << ","
       << fmt(gap) << "\n";
    write_text(cfg.out_dir / "validate.csv", os.str());

    double threshold = cfg.tol("validate_rel", 0.01);
    summary("validate", gap, threshold);
    return gap <= threshold ? 0 : 4;
}

int task_gamma_demo(const RunConfig& cfg, const CliOptions&) {
    int N = cfg.n_max > 0 ? cfg.n_max : 400;
    double gamma_c = euler_constant(100000);
    std::ostringstream os;
    os << "z,gamma_regularized,reference,rel_error\n";
    double worst = 0.0;
    for (int i = 1; i <= 50; ++i) {
        double z = 0.1 * i;
        double ours = gamma_regularized({z, 0.0}, N, gamma_c).real();
        double ref = std::tgamma(z);
        double rel = std::abs(ours - ref) / std::abs(ref);
        worst = std::max(worst, rel);
        os << fmt(z) << "," << fmt(ours) << "," << fmt(ref) << "," << fmt(rel)
           << "\n";
    }
    write_text(cfg.out_dir / "gamma_demo.csv", os.str());
    summary("gamma-demo", worst, 1e-6);
    return 0;
}

}  // namespace

int run_cli(const CliOptions& options) {
    try {
        RunConfig cfg = parse_config(options);
        if (cfg.task == "scatter1d") return task_scatter1d(cfg, options);
        if (cfg.task == "trace1d") return task_trace1d(cfg, options);
        if (cfg.task == "casimir1d") return task_casimir1d(cfg, options);
        if (cfg.task == "scatter3d") return task_scatter3d(cfg, options);
        if (cfg.task == "casimir3d") return task_casimir3d(cfg, options);
        if (cfg.task == "validate") return task_validate(cfg, options);
        if (cfg.task == "gamma-demo") return task_gamma_demo(cfg, options);
        throw ConfigError("unknown task \"" + cfg.task + "\"");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace scatter_trace
