#include "scatter_trace/pvmath.hpp"

#include <algorithm>
#include <cmath>

#include "scatter_trace/errors.hpp"

namespace scatter_trace {

TailModel TailModel::power_law(double exponent, double coefficient) {
    if (!(exponent < 1.0))
        throw DomainError(
            "power-law tail exponent must be < 1 for PV kernels to converge");
    TailModel t;
    t.kind = TailKind::power_law;
    t.exponent = exponent;
    t.coefficient = coefficient;
    return t;
}

SampledFunction::SampledFunction(std::vector<double> abscissae,
                                 std::vector<double> values, TailModel tail)
    : spline_(std::move(abscissae), std::move(values)), tail_(tail) {}

TailModel SampledFunction::fit_tail(std::span<const double> x,
                                    std::span<const double> y, int n_fit) {
    double coeff = 0.0, expo = 0.0;
    if (!fit_power_law(x, y, n_fit, coeff, expo)) return TailModel::zero();
    if (!(expo < 1.0)) return TailModel::zero();
    return TailModel::power_law(expo, coeff);
}

namespace {

// P Int f(t)/(t - c) dt over the sampled range, c strictly inside.
// Panels within two widths of c form a window integrated with the
// singularity subtracted globally; far panels use Gauss-Legendre directly.
// Stable for c anywhere in the interior, knots included.
double pv_over_grid(const CubicSpline& s, double c) {
    const auto& x = s.xs();
    const std::size_t np = s.panel_count();
    const std::size_t ic = s.locate(c);

    // discontinuity guard around the singular point
    {
        const auto& y = s.ys();
        std::size_t lo = ic >= 2 ? ic - 2 : 0;
        std::size_t hi = std::min(ic + 2, np - 1);
        double worst = 0.0, nb = 1e-12;
        for (std::size_t i = lo; i <= hi; ++i) {
            double jump = std::abs(y[i + 1] - y[i]);
            if (jump > worst) {
                nb = 1e-12;
                if (i > 0) nb = std::max(nb, std::abs(y[i] - y[i - 1]));
                if (i + 2 < y.size())
                    nb = std::max(nb, std::abs(y[i + 2] - y[i + 1]));
                worst = jump;
            }
        }
        if (worst > 1e4 * nb && worst > 1e-6)
            throw AccuracyError(
                "sampled data looks discontinuous at the PV point");
    }

    const std::size_t near_lo = ic >= 2 ? ic - 2 : 0;
    const std::size_t near_hi = std::min(ic + 2, np - 1);
    const double fc = s(c);
    const double dfc = s.derivative(c);
    const GaussLegendre& gl_far = gauss_legendre(10);
    const GaussLegendre& gl_near = gauss_legendre(16);

    double total = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        double a = x[i], b = x[i + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        if (i >= near_lo && i <= near_hi) {
            // subtracted integrand [f(t) - f(c)]/(t - c): on the panel
            // holding c it is exactly the quadratic (p(t)-p(c))/(t-c)
            double acc = 0.0;
            for (std::size_t j = 0; j < gl_near.nodes.size(); ++j) {
                double t = mid + half * gl_near.nodes[j];
                double d = t - c;
                double g = std::abs(d) < 1e-12 * (std::abs(t) + std::abs(c))
                               ? dfc
                               : (s.panel_value(i, t) - fc) / d;
                acc += gl_near.weights[j] * g;
            }
            total += acc * half;
        } else {
            double acc = 0.0;
            for (std::size_t j = 0; j < gl_far.nodes.size(); ++j) {
                double t = mid + half * gl_far.nodes[j];
                acc += gl_far.weights[j] * s.panel_value(i, t) / (t - c);
            }
            total += acc * half;
        }
    }
    // log term of the window subtraction; c is strictly interior to it
    total += fc * std::log((x[near_hi + 1] - c) / (c - x[near_lo]));
    return total;
}

// Int f(t)/(t + k) dt over the sampled range (pole outside for k > -front).
double regular_over_grid(const CubicSpline& s, double k) {
    const auto& x = s.xs();
    const GaussLegendre& gl = gauss_legendre(10);
    double total = 0.0;
    for (std::size_t i = 0; i < s.panel_count(); ++i) {
        double a = x[i], b = x[i + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            double t = mid + half * gl.nodes[j];
            acc += gl.weights[j] * s.panel_value(i, t) / (t + k);
        }
        total += acc * half;
    }
    return total;
}

// Int_b^inf C t^s / (t - c) dt as a series in c/b, |c| < b.
double tail_series(double C, double s, double b, double c) {
    double acc = 0.0, cj = 1.0;
    for (int j = 0; j < 4000; ++j) {
        double term = cj * std::pow(b, s - j) / (j - s);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc) + 1e-300) break;
        cj *= c / b;
    }
    return C * acc;
}

double right_tail_pv(const TailModel& tail, double b, double c) {
    if (tail.kind == TailKind::zero) return 0.0;
    return tail_series(tail.coefficient, tail.exponent, b, c);
}

// Int_{-inf}^{a} f(t)/(t - c) dt with f = C |t|^s, a < 0:
// equals -Int_{|a|}^inf C t^s/(t + c) dt.
double left_tail_pv(const TailModel& tail, double a, double c) {
    if (tail.kind == TailKind::zero) return 0.0;
    return -tail_series(tail.coefficient, tail.exponent, std::abs(a), -c);
}

}  // namespace

double pv_hilbert(const SampledFunction& f, double k) {
    if (!(k > f.front() && k < f.back()))
        throw RangeError("pv_hilbert: k must lie strictly inside the grid");
    double v = pv_over_grid(f.spline(), k);
    v += right_tail_pv(f.tail(), f.back(), k);
    if (f.front() < 0.0) v += left_tail_pv(f.tail(), f.front(), k);
    if (!std::isfinite(v)) throw AccuracyError("pv_hilbert: non-finite result");
    // (1/pi) P Int f/(k - k') = -(1/pi) P Int f/(k' - k)
    return -v / M_PI;
}

double pv_symmetric(const SampledFunction& f, double k) {
    if (f.front() < 0.0)
        throw DomainError("pv_symmetric: data must be sampled on k' >= 0");
    if (!(k > f.front() && k < f.back()))
        throw RangeError("pv_symmetric: k must lie strictly inside the grid");
    // 2k/(k^2 - k'^2) = 1/(k - k') + 1/(k + k')
    double v = -pv_over_grid(f.spline(), k) - right_tail_pv(f.tail(), f.back(), k);
    v += regular_over_grid(f.spline(), k);
    if (f.tail().kind == TailKind::power_law)
        v += tail_series(f.tail().coefficient, f.tail().exponent, f.back(), -k);
    if (!std::isfinite(v))
        throw AccuracyError("pv_symmetric: non-finite result");
    return v;
}

namespace {

// Hurwitz zeta(m, a) = sum_{n>=a} n^-m by Euler-Maclaurin.
double hurwitz_zeta_tail(int m, double a) {
    double am = std::pow(a, -m);
    double v = a * am / (m - 1.0) + 0.5 * am + m * am / (12.0 * a);
    v -= m * (m + 1.0) * (m + 2.0) * am / (720.0 * a * a * a);
    return v;
}

}  // namespace

std::complex<double> gamma_regularized(std::complex<double> z, int N,
                                       double gamma_const) {
    if (N < 10) throw DomainError("gamma_regularized: N must be >= 10");
    double zr = std::round(z.real());
    if (zr <= 0.0 && std::abs(z.real() - zr) < 1e-12 &&
        std::abs(z.imag()) < 1e-12)
        throw PoleError("Gamma has a pole at non-positive integers");
    if (std::abs(z) >= N)
        throw DomainError("gamma_regularized: need |z| < N for the tail sum");

    std::complex<double> sum = 0.0;
    for (int n = 1; n <= N; ++n) {
        std::complex<double> w = z / static_cast<double>(n);
        sum += std::log(1.0 + w) - w;
    }
    // n > N: log(1+z/n) - z/n = sum_{m>=2} (-1)^{m+1} z^m / (m n^m)
    std::complex<double> zm = z;
    double a = N + 1.0;
    for (int m = 2; m <= 400; ++m) {
        zm *= z;
        double sgn = (m % 2 == 0) ? -1.0 : 1.0;
        std::complex<double> term =
            sgn * zm / static_cast<double>(m) * hurwitz_zeta_tail(m, a);
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    // 1/Gamma = z e^{gamma z} Prod => Gamma = exp(-gamma z - sum)/z
    return std::exp(-gamma_const * z - sum) / z;
}

double euler_constant(int N) {
    if (N < 100) throw DomainError("euler_constant: N must be >= 100");
    double h = 0.0, comp = 0.0;
    for (int n = N; n >= 1; --n) {  // ascending magnitudes with compensation
        double y = 1.0 / n - comp;
        double t = h + y;
        comp = (t - h) - y;
        h = t;
    }
    double nn = N;
    return h - std::log(nn) - 1.0 / (2.0 * nn) + 1.0 / (12.0 * nn * nn) -
           1.0 / (120.0 * nn * nn * nn * nn);
}

}  // namespace scatter_trace
