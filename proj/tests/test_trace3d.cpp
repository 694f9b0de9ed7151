#include <cmath>

#include "doctest.h"
#include "scatter_trace/errors.hpp"
#include "scatter_trace/trace3d.hpp"

using namespace scatter_trace;

namespace {

std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return g;
}

}  // namespace

TEST_CASE("free potential: everything vanishes") {
    auto in = build_dispersion_inputs(PotentialModel::gaussian(0.0, 1.0),
                                      log_grid(0.05, 8.0, 40), 4);
    CHECK(std::abs(re_tr_f(in, 1.0)) < 1e-12);
    auto res = casimir_energy_3d(in);
    CHECK(std::abs(res.trace.value) < 1e-12);
    CHECK(std::abs(res.trace.breakdown.at("anomaly_term")) < 1e-13);
    CHECK(std::abs(res.trace.breakdown.at("cross_section_term")) < 1e-13);
    CHECK(std::abs(res.trace.breakdown.at("det1_term")) < 1e-13);
}

TEST_CASE("anomaly term matches the closed-form born integral") {
    // B(k) = V0 pi^{3/2} a^3 (1+k^2)^{-2}; Int_0^inf k B dk = B0/2;
    // anomaly = Int (dk/4pi^2) k B = B0 / (8 pi^2)
    double V0 = 0.05;
    auto model = PotentialModel::gaussian(V0, 1.0)
                     .with_dispersion(DispersionProfile::lorentzian(1.0, 2));
    auto in = build_dispersion_inputs(model, log_grid(0.02, 15.0, 120), -1);
    auto res = casimir_energy_3d(in);
    double b0 = V0 * std::pow(M_PI, 1.5);
    CHECK(res.trace.breakdown.at("anomaly_term") ==
          doctest::Approx(b0 / (8.0 * M_PI * M_PI)).epsilon(5e-3));
}

TEST_CASE("dispersion route matches the partial-wave Re tr f") {
    // weak gaussian, no dispersion needed for Re tr f itself
    auto model = PotentialModel::gaussian(0.05, 1.0);
    auto in = build_dispersion_inputs(model, log_grid(0.02, 15.0, 140), -1);
    CubicSpline direct(in.kgrid, in.direct_arg_det);
    for (double k : {0.7, 1.0, 2.0, 3.5}) {
        double disp = re_tr_f(in, k);
        // partial-wave route: Re tr f = sum (2l+1) sin(2 eta)/2k,
        // recovered from arg-det data is not direct; rebuild from spectra
        auto sp = phase_shifts(model, k, -1, 1e-9);
        double pw = trace_f(sp).real();
        CHECK(disp == doctest::Approx(pw).epsilon(0.05));
    }
    (void)direct;
}

TEST_CASE("arg det S identity against the direct channel sum") {
    auto model = PotentialModel::gaussian(0.05, 1.0);
    auto in = build_dispersion_inputs(model, log_grid(0.02, 15.0, 140), -1);
    CubicSpline direct(in.kgrid, in.direct_arg_det);
    for (double k : {0.7, 1.5, 3.0}) {
        CHECK(arg_det_S(in, k) ==
              doctest::Approx(direct(k)).epsilon(0.05).scale(1e-4));
    }
}

TEST_CASE("internal identity on synthetic unitary data") {
    // synthetic eta_l(k) curves; all three inputs derived from them, so
    // arg det S = Im log det1 + 2k Re tr f must close to rounding
    std::vector<PhaseShiftSpectrum> spectra;
    std::vector<double> born;
    auto ks = log_grid(0.1, 10.0, 60);
    for (double k : ks) {
        PhaseShiftSpectrum sp;
        sp.k = k;
        sp.l_max = 2;
        for (int l = 0; l <= 2; ++l) {
            double eta = -0.3 * std::exp(-0.5 * k * k * (l + 1.0)) * k /
                         (1.0 + k * k);
            sp.channels.push_back({l, 2 * l + 1, eta});
        }
        spectra.push_back(sp);
        born.push_back(0.0);
    }
    auto in = dispersion_inputs_from_spectra(spectra, born);
    CubicSpline det1(in.kgrid, in.log_det1_arg);
    for (double k : {0.5, 1.0, 2.0}) {
        double lhs = arg_det_S(in, k);
        double rhs = det1(k) + 2.0 * k * re_tr_f(in, k);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("cross-section kernel is symmetric and its numerator antisymmetric") {
    auto sig = [](double k) { return 1.0 / (1.0 + k * k * k * k); };
    auto numer = [&](double k, double kp) {
        return k * kp * (kp * sig(kp) - k * sig(k));
    };
    auto kernel = [&](double k, double kp) {
        return numer(k, kp) / (kp * kp - k * k);
    };
    CHECK(numer(1.3, 0.4) == -numer(0.4, 1.3));
    CHECK(kernel(1.3, 0.4) == doctest::Approx(kernel(0.4, 1.3)).epsilon(1e-15));
}

TEST_CASE("casimir 3d is deterministic") {
    auto model = PotentialModel::gaussian(0.05, 1.0)
                     .with_dispersion(DispersionProfile::lorentzian(1.0, 3));
    auto in = build_dispersion_inputs(model, log_grid(0.02, 15.0, 80), -1);
    auto a = casimir_energy_3d(in);
    auto b = casimir_energy_3d(in);
    CHECK(a.trace.value == b.trace.value);
    CHECK(a.trace.breakdown.at("cross_section_term") ==
          b.trace.breakdown.at("cross_section_term"));
}

TEST_CASE("scaling: anomaly linear, det1 super-quadratic in V0") {
    auto grid = log_grid(0.02, 15.0, 70);
    double anomaly[2], det1t[2], cs[2];
    int i = 0;
    for (double v0 : {0.02, 0.04}) {
        auto model =
            PotentialModel::gaussian(v0, 1.0)
                .with_dispersion(DispersionProfile::lorentzian(1.0, 3));
        auto res = casimir_energy_3d(build_dispersion_inputs(model, grid, -1));
        anomaly[i] = res.trace.breakdown.at("anomaly_term");
        det1t[i] = res.trace.breakdown.at("det1_term");
        cs[i] = res.trace.breakdown.at("cross_section_term");
        ++i;
    }
    double p_anom = std::log2(anomaly[1] / anomaly[0]);
    double p_det1 = std::log2(det1t[1] / det1t[0]);
    double p_cs = std::log2(cs[1] / cs[0]);
    CHECK(p_anom == doctest::Approx(1.0).epsilon(0.05));
    CHECK(p_det1 > 2.5);  // arg det1 ~ eta^3 at weak coupling
    CHECK(p_cs == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("weak-coupling flag and bound report") {
    auto model = PotentialModel::gaussian(0.05, 1.0)
                     .with_dispersion(DispersionProfile::lorentzian(1.0, 3));
    auto in = build_dispersion_inputs(model, log_grid(0.02, 15.0, 70), -1);
    auto res = casimir_energy_3d(in);
    CHECK(res.weak_coupling);
    CHECK(!res.bound_violated);  // weak coupling satisfies the det1 bound
    CHECK(res.det1_bound > 0.0);
}

TEST_CASE("non-dispersive input is rejected for the casimir energy") {
    auto model = PotentialModel::gaussian(0.4, 1.0);
    auto in = build_dispersion_inputs(model, log_grid(0.05, 12.0, 90), -1);
    CHECK_THROWS_AS(casimir_energy_3d(in), ConvergenceError);
}

TEST_CASE("input validation") {
    DispersionInputs in;
    in.kgrid = {1.0, 2.0};
    in.sigma_bar = {0.1, 0.1};
    in.log_det1_arg = {0.0, 0.0};
    in.born_integral = {0.1, 0.1};
    CHECK_THROWS_AS(in.validate(), GridError);  // too few points
}

TEST_CASE("re_tr_f outside the tabulated grid raises RangeError") {
    auto in = build_dispersion_inputs(PotentialModel::gaussian(0.05, 1.0),
                                      log_grid(0.1, 5.0, 40), 4, 1e-2);
    CHECK_THROWS_AS(re_tr_f(in, 10.0), RangeError);
    CHECK_THROWS_AS(re_tr_f(in, 0.01), RangeError);
}
