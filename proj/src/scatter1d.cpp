#include "scatter_trace/scatter1d.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "scatter_trace/errors.hpp"
#include "scatter_trace/numerics.hpp"
#include "scatter_trace/parallel.hpp"

namespace scatter_trace {

namespace {

using complexd = std::complex<double>;
const complexd I(0.0, 1.0);

struct Amplitudes {
    complexd R, T;
};

// One Numerov sweep from x_right down through the support at step h and on
// through the force-free pad [x_left, x_edge] at a coarser step, starting
// from the pure outgoing wave u = e^{ikx}. Returns (R, T) from a two-point
// plane-wave match in the pad, spaced about a quarter wavelength.
Amplitudes sweep(const PotentialModel& model, double k, double x_left,
                 double x_edge, double x_right, double h) {
    // coarse pad step: (k h2)^4 per unit phase stays within budget
    double pad = x_edge - x_left;
    double h_free = std::min(0.01 / (k * std::sqrt(k)), pad / 4.0);
    std::size_t sub = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(h_free / h)));
    double h2 = h * static_cast<double>(sub);

    // dense segment over the support, extended one coarse spacing past the
    // edge so both seeds of the coarse segment sit in force-free space
    const std::size_t n1 = static_cast<std::size_t>(
                               std::ceil((x_right - (x_edge - h2)) / h)) +
                           1;
    const double xa = x_right - h * static_cast<double>(n1 - 1);

    std::vector<double> w(n1);
    for (std::size_t i = 0; i < n1; ++i)
        w[i] = model.evaluate(x_right - h * static_cast<double>(i), k) -
               k * k;
    std::vector<complexd> u(n1);
    u[0] = std::exp(I * k * x_right);
    u[1] = std::exp(I * k * (x_right - h));
    numerov_forward(w, h, u);

    // coarse segment down to x_left, seeded off the dense grid
    double span2 = xa - x_left;
    std::size_t n2 =
        static_cast<std::size_t>(std::ceil(span2 / h2)) + 2;

    std::vector<double> w2(n2);
    std::vector<complexd> u2v(n2);
    for (std::size_t i = 0; i < n2; ++i) {
        double x = xa + h2 - h2 * static_cast<double>(i);
        w2[i] = model.evaluate(x, k) - k * k;
    }
    u2v[0] = u[n1 - 1 - sub];  // x = xa + h2
    u2v[1] = u[n1 - 1];        // x = xa
    numerov_forward(w2, h2, u2v);
    const double x_end = xa + h2 - h2 * static_cast<double>(n2 - 1);

    // match points: the far end and a quarter wavelength inward
    std::size_t m = static_cast<std::size_t>(
        std::max(1.0, std::floor(M_PI / (2.0 * k) / h2)));
    m = std::min(m, n2 - 2);
    double x1 = x_end, x2 = x_end + h2 * static_cast<double>(m);
    complexd u1 = u2v[n2 - 1], u2 = u2v[n2 - 1 - m];

    complexd e1p = std::exp(I * k * x1), e1m = std::exp(-I * k * x1);
    complexd e2p = std::exp(I * k * x2), e2m = std::exp(-I * k * x2);
    complexd det = e1p * e2m - e1m * e2p;
    complexd A = (u1 * e2m - u2 * e1m) / det;
    complexd B = (u2 * e1p - u1 * e2p) / det;
    return {B / A, 1.0 / A};
}

ScatterData1D assemble(double k, complexd R, complexd T, double arg_T) {
    ScatterData1D d;
    d.k = k;
    d.R = R;
    d.T = T;
    d.arg_T = arg_T;
    double theta_r = std::atan2(std::abs(R), std::abs(T));
    d.eta1 = 0.5 * (arg_T + theta_r);
    d.eta2 = 0.5 * (arg_T - theta_r);
    d.S = ScatterData1D::s_matrix(R, T);
    return d;
}

// Piecewise-constant potentials propagate exactly: over a cell with
// u'' = w u, w constant,
//   [u, u'](x+h) = [[C, S], [w S, C]] [u, u'](x),
// C = cosh(sqrt(w) h), S = sinh(sqrt(w) h)/sqrt(w) (trig form for w < 0).
void propagate_const(double w, double h, complexd& u, complexd& du) {
    double C, S;
    if (w > 1e-300) {
        double q = std::sqrt(w);
        C = std::cosh(q * h);
        S = std::sinh(q * h) / q;
    } else if (w < -1e-300) {
        double q = std::sqrt(-w);
        C = std::cos(q * h);
        S = std::sin(q * h) / q;
    } else {
        C = 1.0;
        S = h;
    }
    complexd u_new = C * u + S * du;
    du = w * S * u + C * du;
    u = u_new;
}

// Exact solve for the slab on [e1, e2] with height V0(k).
ScatterData1D solve_square_barrier(const PotentialModel& model, double k) {
    double e1 = 0.0, e2 = model.param_width();
    double v0 = model.evaluate(0.5 * (e1 + e2), k);
    bool flipped = model.evaluate(-0.5 * e2, k) > 0.0;  // mirrored slab
    if (flipped) {
        e1 = -model.param_width();
        e2 = 0.0;
        v0 = model.evaluate(0.5 * (e1 + e2), k);
    }
    complexd u = std::exp(I * k * e2);
    complexd du = I * k * u;
    propagate_const(v0 - k * k, e1 - e2, u, du);  // backward through the slab
    complexd em = std::exp(-I * k * e1), ep = std::exp(I * k * e1);
    complexd A = 0.5 * em * (u + du / (I * k));
    complexd B = 0.5 * ep * (u - du / (I * k));
    complexd T = 1.0 / A, R = B / A;
    return assemble(k, R, T, std::arg(T));
}

ScatterData1D solve_numeric(const PotentialModel& model, double k, double tol) {
    const double X = std::max(model.support_radius(1e-14), 1.0);
    // Pad the left side so the two matching points straddle roughly a
    // quarter wavelength.
    const double pad = std::min(M_PI / (2.0 * k), 30.0);
    const double x_left = -X - pad, x_right = X;

    // Step from the Numerov phase-error budget (2X k (kh)^4 / 480), from
    // the potential scale, and from the requested tolerance; at low k the
    // plane-wave match loses a factor ~ 1/sin(k dx), which the tolerance
    // budget absorbs.
    double span = x_right - x_left;
    double h_osc = std::pow(480.0 * std::max(tol, 1e-13) /
                                (span * std::pow(k, 5.0) + 1e-300),
                            0.25);
    double h_pot = std::max(model.support_radius(1e-3), 0.2) / 40.0;
    double amp = std::max(1.0, 1.0 / std::sin(std::min(k * pad, M_PI / 2.0)));
    double h_tol =
        0.0125 * std::pow(std::max(tol, 1e-13) * 1e10 / amp, 0.25);
    double h = std::min({h_osc, h_pot, h_tol, 0.05});
    h = std::max(h, span / 4e6);

    Amplitudes coarse = sweep(model, k, x_left, -X, x_right, h);
    Amplitudes fine = sweep(model, k, x_left, -X, x_right, h / 2.0);

    // Numerov error is O(h^4): Richardson on the amplitudes.
    complexd R = (16.0 * fine.R - coarse.R) / 15.0;
    complexd T = (16.0 * fine.T - coarse.T) / 15.0;

    double defect = std::abs(std::norm(R) + std::norm(T) - 1.0);
    if (defect > std::max(100.0 * tol, 1e-8) || !std::isfinite(defect))
        throw IntegrationError(
            "1D solve did not reach tolerance at k=" + std::to_string(k) +
            " (unitarity defect " + std::to_string(defect) + ")");
    return assemble(k, R, T, std::arg(T));
}

}  // namespace

double AsymptoticAmplitudes::flux_defect() const {
    return std::norm(A) + std::norm(D) - std::norm(C) - std::norm(B);
}

Eigen::Matrix2cd ScatterData1D::s_matrix(complexd R, complexd T) {
    Eigen::Matrix2cd S;
    S(0, 0) = T;
    S(0, 1) = -std::conj(R) * T / std::conj(T);
    S(1, 0) = R;
    S(1, 1) = T;
    return S;
}

double ScatterData1D::unitarity_defect() const {
    Eigen::Matrix2cd G = S.adjoint() * S - Eigen::Matrix2cd::Identity();
    return G.cwiseAbs().maxCoeff();
}

ScatterData1D solve(const PotentialModel& model, double k, double tol) {
    if (!(k > 0.0)) throw DomainError("solve: k must be > 0");

    if (model.kind() == PotentialKind::delta) {
        double g = model.delta_strength(k);
        complexd T = 1.0 / (1.0 + I * g / (2.0 * k));
        complexd R = T - 1.0;
        return assemble(k, R, T, std::arg(T));
    }
    // A discontinuous slab breaks the smoothness Numerov relies on, but
    // piecewise-constant cells propagate exactly.
    if (model.kind() == PotentialKind::square_barrier)
        return solve_square_barrier(model, k);

    if (k < kLowKCutoff) {
        ScatterData1D ref = solve_numeric(model, kLowKCutoff, tol);
        if (std::abs(ref.R) < 1e-8)  // effectively free at threshold
            return assemble(k, ref.R, ref.T, ref.arg_T);
        // T ~ alpha k near threshold: scale the cutoff solution down.
        complexd T = ref.T * (k / kLowKCutoff);
        double r_mag = std::sqrt(std::max(0.0, 1.0 - std::norm(T)));
        complexd R = ref.R / std::abs(ref.R) * r_mag;
        return assemble(k, R, T, std::arg(T));
    }

    return solve_numeric(model, k, tol);
}

std::vector<ScatterData1D> solve_grid(const PotentialModel& model,
                                      std::span<const double> kgrid,
                                      double tol) {
    if (kgrid.empty()) return {};
    for (std::size_t i = 0; i < kgrid.size(); ++i) {
        if (!(kgrid[i] > 0.0)) throw GridError("kgrid entries must be > 0");
        if (i > 0 && !(kgrid[i] > kgrid[i - 1]))
            throw GridError("kgrid must be strictly ascending");
    }

    std::vector<ScatterData1D> out(kgrid.size());
    parallel_for(kgrid.size(),
                 [&](std::size_t i) { out[i] = solve(model, kgrid[i], tol); });

    // Continuous branch of arg T across the grid.
    std::vector<double> phases(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) phases[i] = std::arg(out[i].T);
    double max_jump = unwrap_angles(phases);
    if (max_jump > 0.9 * M_PI)
        throw BranchError(
            "phase unwrapping found a near-pi jump between grid points; the "
            "k-grid is too coarse");

    // Anchor: arg T -> -Int V / 2k at the top of the grid (Born tail).
    double k_top = kgrid.back();
    double born = -model.integral_1d(k_top) / (2.0 * k_top);
    double nu = std::round((born - phases.back()) / (2.0 * M_PI));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = assemble(out[i].k, out[i].R, out[i].T,
                          phases[i] + 2.0 * M_PI * nu);
    return out;
}

void save_scatter1d_csv(const std::string& path,
                        std::span<const ScatterData1D> data) {
    std::ofstream f(path);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << "k,re_r,im_r,re_t,im_t,arg_det_s,r_squared\n";
    char line[512];
    for (const auto& d : data) {
        std::snprintf(line, sizeof(line),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.k,
                      d.R.real(), d.R.imag(), d.T.real(), d.T.imag(),
                      d.arg_det_s(), std::norm(d.R));
        f << line;
    }
}

std::vector<ScatterData1D> load_scatter1d_csv(const std::string& path,
                                              double unitarity_tol) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError(path + ": empty file");
    std::vector<ScatterData1D> out;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        double vals[7];
        std::istringstream ss(line);
        std::string cell;
        int i = 0;
        while (std::getline(ss, cell, ',') && i < 7) vals[i++] = std::stod(cell);
        if (i != 7)
            throw FormatError(path + ": line " + std::to_string(lineno) +
                              " has " + std::to_string(i) + " columns, want 7");
        complexd R(vals[1], vals[2]), T(vals[3], vals[4]);
        double defect = std::abs(std::norm(R) + std::norm(T) - 1.0);
        if (defect > unitarity_tol)
            throw UnitarityError(path + ": |R|^2+|T|^2 deviates by " +
                                 std::to_string(defect) + " at k=" +
                                 std::to_string(vals[0]));
        out.push_back(assemble(vals[0], R, T, vals[5] / 2.0));
        if (out.size() > 1 && !(out.back().k > out[out.size() - 2].k))
            throw GridError(path + ": k column must be strictly ascending");
    }
    return out;
}

}  // namespace scatter_trace
