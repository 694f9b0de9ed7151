#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace scatter_trace {

struct GaussLegendre {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Nodes/weights for the given order, computed once and cached.
const GaussLegendre& gauss_legendre(int order);

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;
};

// Composite fixed-order Gauss-Legendre over consecutive breakpoints.
double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> breaks, int order = 8);

// Panel-doubling integral with an error estimate from the last refinement.
IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b, double rel_tol = 1e-10,
                                  double abs_tol = 1e-300,
                                  int max_doublings = 16);

// Natural cubic spline through (x_i, y_i), x strictly ascending.
// Panel i covers [x_i, x_{i+1}] with p_i(t) = y_i + b_i u + c_i u^2 + d_i u^3,
// u = t - x_i.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    double derivative(double t) const;

    std::size_t panel_count() const { return x_.empty() ? 0 : x_.size() - 1; }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

    // Panel polynomial evaluated at t (may extrapolate off the panel).
    double panel_value(std::size_t i, double t) const;
    // Integral of panel i's cubic over the panel.
    double panel_integral(std::size_t i) const;
    // Exact integral over panel i of [p_i(t) - p_i(c)] / (t - c).
    double panel_subtracted_integral(std::size_t i, double c) const;
    // Integral of the spline over [a, b] within the grid.
    double integral(double a, double b) const;

    std::size_t locate(double t) const;

private:
    std::vector<double> x_, y_, b_, c_, d_;
};

// Monotonicity-preserving (Fritsch-Carlson) piecewise cubic Hermite.
// Between non-negative samples the interpolant stays non-negative.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    // Value inside the grid; 0 outside when clamp_zero_outside (the default),
    // else the edge value.
    double operator()(double t) const;
    double derivative(double t) const;
    void set_clamp_zero_outside(bool on) { clamp_zero_ = on; }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

private:
    std::size_t locate(double t) const;
    std::vector<double> x_, y_, m_;  // m_: endpoint slopes
    bool clamp_zero_ = true;
};

// Brent root bracketing on [a, b]; f(a), f(b) must have opposite signs.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol = 1e-13, int max_iter = 200);

// Unwraps a sequence of angles so adjacent differences lie in (-pi, pi].
// Returns the largest adjusted jump (for coarse-grid detection upstream).
double unwrap_angles(std::vector<double>& angles);

// Least-squares fit of y ~ coeff * x^exponent on the last `n_fit` samples
// (log-log regression on |y|; the sign of y is carried by coeff).
// Returns false when the data is unusable (zeros or sign changes).
bool fit_power_law(std::span<const double> x, std::span<const double> y,
                   int n_fit, double& coeff, double& exponent);

// Numerov march for u'' = w(x) u on a uniform grid.
// u has size n and u[0], u[1] set; w[i] is the coefficient at grid point i.
void numerov_forward(std::span<const double> w, double h,
                     std::span<std::complex<double>> u);
void numerov_forward_real(std::span<const double> w, double h,
                          std::span<double> u);

// Legendre polynomial P_l(x) by upward recurrence.
double legendre_p(int l, double x);

// Riccati-Bessel functions j^(x) = x j_l(x) and y^(x) = x y_l(x) for
// l = 0..l_max. The regular family uses downward (Miller) recurrence where
// the upward one is unstable.
void riccati_bessel(int l_max, double x, std::vector<double>& sj,
                    std::vector<double>& sy);

// Lowest n eigenvalues of the symmetric tridiagonal matrix (diag, offdiag)
// by bisection (LAPACK dstebz), ascending.
std::vector<double> tridiag_lowest_eigenvalues(std::span<const double> diag,
                                               std::span<const double> offdiag,
                                               int n_lowest);

}  // namespace scatter_trace
