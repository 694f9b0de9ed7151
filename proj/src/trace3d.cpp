#include "scatter_trace/trace3d.hpp"

#include <algorithm>
#include <cmath>

#include "scatter_trace/errors.hpp"

namespace scatter_trace {

void DispersionInputs::validate() const {
    const std::size_t n = kgrid.size();
    if (n < 8) throw GridError("dispersion inputs need at least 8 k points");
    if (sigma_bar.size() != n || log_det1_arg.size() != n ||
        born_integral.size() != n)
        throw GridError("dispersion input curves must share the k-grid");
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(kgrid[i] > kgrid[i - 1]))
            throw GridError("dispersion k-grid must be ascending");
        if (!(kgrid[i] > 0.0)) throw GridError("dispersion k-grid must be > 0");
        if (sigma_bar[i] < 0.0)
            throw DomainError("sigma_bar must be non-negative");
        if (born_integral[i] < 0.0)
            throw DomainError("born_integral must be non-negative (V >= 0)");
    }
    // k^2 sigma must stay bounded on the tail (sigma ~ k^-2 or faster)
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        peak = std::max(peak, kgrid[i] * kgrid[i] * sigma_bar[i]);
    double tail = kgrid[n - 1] * kgrid[n - 1] * sigma_bar[n - 1];
    double mid = kgrid[n / 2] * kgrid[n / 2] * sigma_bar[n / 2];
    if (peak > 0.0 && tail > 4.0 * std::max(mid, 0.25 * peak))
        throw TailError("k^2 sigma_bar is still growing at the top of the "
                        "grid; it must be bounded");
}

DispersionInputs build_dispersion_inputs(const PotentialModel& model,
                                         std::span<const double> kgrid,
                                         int l_max, double tol) {
    std::vector<PhaseShiftSpectrum> spectra =
        phase_shifts_grid(model, kgrid, l_max, tol);

    DispersionInputs in;
    in.kgrid.assign(kgrid.begin(), kgrid.end());
    in.sigma_bar.resize(kgrid.size());
    in.log_det1_arg.resize(kgrid.size());
    in.born_integral.resize(kgrid.size());
    in.hs_bound.resize(kgrid.size());
    in.direct_arg_det.resize(kgrid.size());
    for (std::size_t i = 0; i < kgrid.size(); ++i) {
        const auto& sp = spectra[i];
        in.sigma_bar[i] = cross_section(sp).sigma_bar;
        in.log_det1_arg[i] = log_det1(sp).imag();
        in.born_integral[i] = model.born_integral_3d(kgrid[i]);
        in.hs_bound[i] =
            kgrid[i] * kgrid[i] * in.sigma_bar[i] / (2.0 * M_PI);
        double direct = 0.0;
        for (const auto& ch : sp.channels) direct += 2.0 * ch.degeneracy * ch.eta;
        in.direct_arg_det[i] = direct;
        for (const auto& ch : sp.channels)
            in.max_abs_eta = std::max(in.max_abs_eta, std::abs(ch.eta));
    }
    in.validate();
    return in;
}

DispersionInputs dispersion_inputs_from_spectra(
    std::span<const PhaseShiftSpectrum> spectra,
    std::span<const double> born_integral) {
    if (spectra.size() != born_integral.size())
        throw GridError("born_integral table must match the spectra grid");
    DispersionInputs in;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const auto& sp = spectra[i];
        in.kgrid.push_back(sp.k);
        in.sigma_bar.push_back(cross_section(sp).sigma_bar);
        in.log_det1_arg.push_back(log_det1(sp).imag());
        in.born_integral.push_back(born_integral[i]);
        in.hs_bound.push_back(sp.k * sp.k * in.sigma_bar.back() / (2.0 * M_PI));
        double direct = 0.0;
        for (const auto& ch : sp.channels) direct += 2.0 * ch.degeneracy * ch.eta;
        in.direct_arg_det.push_back(direct);
        for (const auto& ch : sp.channels)
            in.max_abs_eta = std::max(in.max_abs_eta, std::abs(ch.eta));
    }
    in.validate();
    return in;
}

namespace {

// k'^2 sigma(k') as a sampled function with a fitted power tail.
SampledFunction k2sigma_sample(const DispersionInputs& in) {
    std::vector<double> v(in.kgrid.size());
    for (std::size_t i = 0; i < in.kgrid.size(); ++i)
        v[i] = in.kgrid[i] * in.kgrid[i] * in.sigma_bar[i];
    TailModel tail = SampledFunction::fit_tail(in.kgrid, v, 10);
    return SampledFunction(std::vector<double>(in.kgrid.begin(), in.kgrid.end()),
                           std::move(v), tail);
}

}  // namespace

double re_tr_f(const DispersionInputs& inputs, double k) {
    inputs.validate();
    if (!(k > inputs.kgrid.front() && k < inputs.kgrid.back()))
        throw RangeError("re_tr_f: k must lie inside the tabulated grid");
    SampledFunction f = k2sigma_sample(inputs);
    // P Int 2 f(k')/(k'^2 - k^2) dk' = -pv_symmetric(f, k)/k
    double pv = -pv_symmetric(f, k) / k;
    CubicSpline born(std::vector<double>(inputs.kgrid.begin(),
                                         inputs.kgrid.end()),
                     std::vector<double>(inputs.born_integral.begin(),
                                         inputs.born_integral.end()));
    return -born(k) / (4.0 * M_PI) + pv / (4.0 * M_PI * M_PI);
}

double arg_det_S(const DispersionInputs& inputs, double k) {
    CubicSpline det1(std::vector<double>(inputs.kgrid.begin(),
                                         inputs.kgrid.end()),
                     std::vector<double>(inputs.log_det1_arg.begin(),
                                         inputs.log_det1_arg.end()));
    return det1(k) + 2.0 * k * re_tr_f(inputs, k);
}

nlohmann::json Casimir3dResult::to_json() const {
    nlohmann::json j = trace.to_json();
    j["total"] = trace.value;
    j["anomaly_term"] = trace.breakdown.at("anomaly_term");
    j["cross_section_term"] = trace.breakdown.at("cross_section_term");
    j["det1_term"] = trace.breakdown.at("det1_term");
    j["det1_bound"] = det1_bound;
    j["bound_violated"] = bound_violated;
    j["weak_coupling_flag"] = weak_coupling;
    j["error_estimate"] = trace.quadrature_error;
    return j;
}

Casimir3dResult casimir_energy_3d(const DispersionInputs& inputs) {
    inputs.validate();
    const auto& ks = inputs.kgrid;
    const std::size_t n = ks.size();

    // The double integral needs k sigma(k) -> 0, i.e. sigma falling faster
    // than k^-1; physical dispersive data falls at least like k^-2 m(k)^2.
    {
        std::vector<double> ksig(n);
        for (std::size_t i = 0; i < n; ++i) ksig[i] = ks[i] * inputs.sigma_bar[i];
        double coeff = 0.0, expo = 0.0;
        bool ok = fit_power_law(ks, ksig, 10, coeff, expo);
        double top = std::abs(ksig.back());
        double peak = 0.0;
        for (double v : ksig) peak = std::max(peak, std::abs(v));
        if (peak > 1e-13 && top > std::max(1e-6 * peak, 1e-10) &&
            (!ok || !(expo < -1.0)))
            throw ConvergenceError(
                "k sigma_bar(k) has not decayed within the grid: the Casimir "
                "double integral needs dispersive input (k^2 V -> 0)");
    }

    CubicSpline sigma(std::vector<double>(ks.begin(), ks.end()),
                      std::vector<double>(inputs.sigma_bar.begin(),
                                          inputs.sigma_bar.end()));
    CubicSpline born(std::vector<double>(ks.begin(), ks.end()),
                     std::vector<double>(inputs.born_integral.begin(),
                                         inputs.born_integral.end()));
    CubicSpline det1(std::vector<double>(ks.begin(), ks.end()),
                     std::vector<double>(inputs.log_det1_arg.begin(),
                                         inputs.log_det1_arg.end()));

    // ---- anomaly term: Int (dk/4pi^2) k B(k), B extended by its tail fit
    IntegralResult anomaly_main{0.0, 0.0};
    {
        auto g = [&](double k) { return k * born(k); };
        double coarse = integrate_panels(g, ks, 4);
        double fine = integrate_panels(g, ks, 8);
        anomaly_main = {fine, std::abs(fine - coarse)};
        // head [0, k0]: B smooth at 0
        auto head = integrate_adaptive(
            [&](double k) {
                return k * (born(ks.front()) +
                            born.derivative(ks.front()) * (k - ks.front()));
            },
            0.0, ks.front(), 1e-12);
        anomaly_main.value += head.value;
        anomaly_main.error += head.error + 0.25 * std::abs(head.value);
        // tail: power-law extension of B
        double coeff = 0.0, expo = 0.0;
        if (fit_power_law(ks, inputs.born_integral, 10, coeff, expo) &&
            expo < -2.0) {
            double b = ks.back();
            double tail = coeff * std::pow(b, expo + 2.0) / (-2.0 - expo);
            anomaly_main.value += tail;
            anomaly_main.error += 0.1 * std::abs(tail);
        } else {
            double guess = ks.back() * ks.back() * born(ks.back());
            if (std::abs(guess) >
                1e-6 * std::abs(anomaly_main.value) + 1e-300)
                throw ConvergenceError(
                    "k Int V(x,k) d^3x has not decayed within the grid; the "
                    "anomaly integral needs dispersive input");
        }
    }
    double anomaly_term = anomaly_main.value / (4.0 * M_PI * M_PI);

    // ---- cross-section double integral with the symmetric kernel
    auto kernel = [&](double ka, double kb) {
        double u = std::min(ka, kb), v = std::max(ka, kb);
        if ((v - u) <= 1e-9 * v) {
            double m = 0.5 * (u + v);
            // diagonal limit (k/2) d[k sigma]/dk
            return m * m * (sigma(m) + m * sigma.derivative(m)) / (2.0 * m);
        }
        return u * v * (v * sigma(v) - u * sigma(u)) / ((v - u) * (v + u));
    };
    const GaussLegendre& gl4 = gauss_legendre(4);
    const GaussLegendre& gl7 = gauss_legendre(7);
    std::vector<double> breaks;
    {
        std::size_t stride = std::max<std::size_t>(1, n / 200);
        for (std::size_t i = 0; i < n; i += stride) breaks.push_back(ks[i]);
        if (breaks.back() != ks.back()) breaks.push_back(ks.back());
    }
    auto tensor_pass = [&](const GaussLegendre& gl) {
        const std::size_t np = breaks.size() - 1;
        std::vector<std::vector<double>> pn(np);
        for (std::size_t i = 0; i < np; ++i) {
            double mid = 0.5 * (breaks[i] + breaks[i + 1]);
            double half = 0.5 * (breaks[i + 1] - breaks[i]);
            pn[i].resize(gl.nodes.size());
            for (std::size_t j = 0; j < gl.nodes.size(); ++j)
                pn[i][j] = mid + half * gl.nodes[j];
        }
        double total = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            double hi = 0.5 * (breaks[i + 1] - breaks[i]);
            for (std::size_t j = 0; j < np; ++j) {
                double hj = 0.5 * (breaks[j + 1] - breaks[j]);
                double acc = 0.0;
                for (std::size_t a = 0; a < gl.nodes.size(); ++a)
                    for (std::size_t b = 0; b < gl.nodes.size(); ++b)
                        acc += gl.weights[a] * gl.weights[b] *
                               kernel(pn[i][a], pn[j][b]);
                total += acc * hi * hj;
            }
        }
        return total;
    };
    double cs_coarse = tensor_pass(gl4);
    double cs_fine = tensor_pass(gl7);
    double cross_section_term = -cs_fine / (4.0 * M_PI * M_PI * M_PI);
    double cs_error = std::abs(cs_fine - cs_coarse) / (4.0 * M_PI * M_PI * M_PI);

    // ---- det_1 term and its cross-section bound
    auto det1_integrand = [&](double k) { return det1(k); };
    double d1_coarse = integrate_panels(det1_integrand, ks, 4);
    double d1_fine = integrate_panels(det1_integrand, ks, 8);
    double det1_term = -d1_fine / (2.0 * M_PI);
    double d1_error = std::abs(d1_fine - d1_coarse) / (2.0 * M_PI);

    auto bound_integrand = [&](double k) {
        return k * k * sigma(k) / (2.0 * M_PI);
    };
    double det1_bound = integrate_panels(bound_integrand, ks, 8) / (2.0 * M_PI);

    Casimir3dResult res;
    res.trace.breakdown["anomaly_term"] = anomaly_term;
    res.trace.breakdown["cross_section_term"] = cross_section_term;
    res.trace.breakdown["det1_term"] = det1_term;
    res.trace.value = anomaly_term + cross_section_term + det1_term;
    res.trace.quadrature_error =
        anomaly_main.error / (4.0 * M_PI * M_PI) + cs_error + d1_error;
    res.trace.kgrid_used = {ks.front(), ks.back(), n};
    res.det1_bound = det1_bound;
    res.bound_violated = std::abs(det1_term) >= det1_bound;
    res.weak_coupling = inputs.max_abs_eta > 0.0
                            ? inputs.max_abs_eta < 0.5
                            : *std::max_element(inputs.hs_bound.begin(),
                                                inputs.hs_bound.end()) <
                                  M_PI / 4.0;
    return res;
}

}  // namespace scatter_trace
