#include "scatter_trace/numerics.hpp"

#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "scatter_trace/errors.hpp"
#include "scatter_trace/parallel.hpp"

namespace scatter_trace {

namespace {

GaussLegendre compute_gauss_legendre(int n) {
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    // Newton iteration on P_n with the Tricomi initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> breaks, int order) {
    const GaussLegendre& gl = gauss_legendre(order);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double a = breaks[i], b = breaks[i + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (int j = 0; j < order; ++j)
            s += gl.weights[j] * f(mid + half * gl.nodes[j]);
        total += s * half;
    }
    return total;
}

IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  double a, double b, double rel_tol,
                                  double abs_tol, int max_doublings) {
    if (!(b > a)) return {0.0, 0.0};
    int n = 4;
    std::vector<double> breaks;
    auto make_breaks = [&](int panels) {
        breaks.resize(panels + 1);
        for (int i = 0; i <= panels; ++i)
            breaks[i] = a + (b - a) * i / panels;
    };
    make_breaks(n);
    double prev = integrate_panels(f, breaks, 8);
    for (int it = 0; it < max_doublings; ++it) {
        n *= 2;
        make_breaks(n);
        double cur = integrate_panels(f, breaks, 8);
        double err = std::abs(cur - prev);
        if (err <= rel_tol * std::abs(cur) + abs_tol) return {cur, err};
        prev = cur;
    }
    return {prev, std::abs(prev) * rel_tol * 16};
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw GridError("spline needs at least two samples");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(x_[i + 1] > x_[i]))
            throw GridError("spline abscissae must be strictly ascending");
    for (double v : y_)
        if (!std::isfinite(v)) throw GridError("spline values must be finite");

    // Natural spline: solve the tridiagonal system for second derivatives.
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    std::vector<double> m2(n, 0.0);  // second derivatives
    if (n > 2) {
        std::vector<double> diag(n - 2), rhs(n - 2), sub(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] -
                                (y_[i] - y_[i - 1]) / h[i - 1]);
            sub[i - 1] = h[i - 1];
        }
        // Thomas algorithm; superdiagonal is h[i].
        for (std::size_t i = 1; i < diag.size(); ++i) {
            double w = sub[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m2[n - 2] = rhs.back() / diag.back();
        for (std::size_t i = diag.size() - 1; i-- > 0;)
            m2[i + 1] = (rhs[i] - h[i + 1] * m2[i + 2]) / diag[i];
    }

    b_.resize(n - 1);
    c_.resize(n - 1);
    d_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        b_[i] = (y_[i + 1] - y_[i]) / h[i] - h[i] * (2.0 * m2[i] + m2[i + 1]) / 6.0;
        c_[i] = m2[i] / 2.0;
        d_[i] = (m2[i + 1] - m2[i]) / (6.0 * h[i]);
    }
}

std::size_t CubicSpline::locate(double t) const {
    if (t <= x_.front()) return 0;
    if (t >= x_.back()) return x_.size() - 2;
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double CubicSpline::operator()(double t) const {
    std::size_t i = locate(t);
    double u = t - x_[i];
    return y_[i] + u * (b_[i] + u * (c_[i] + u * d_[i]));
}

double CubicSpline::derivative(double t) const {
    std::size_t i = locate(t);
    double u = t - x_[i];
    return b_[i] + u * (2.0 * c_[i] + 3.0 * u * d_[i]);
}

double CubicSpline::panel_value(std::size_t i, double t) const {
    double u = t - x_[i];
    return y_[i] + u * (b_[i] + u * (c_[i] + u * d_[i]));
}

double CubicSpline::panel_integral(std::size_t i) const {
    double h = x_[i + 1] - x_[i];
    return h * (y_[i] + h * (b_[i] / 2.0 + h * (c_[i] / 3.0 + h * d_[i] / 4.0)));
}

double CubicSpline::panel_subtracted_integral(std::size_t i, double c) const {
    // (p(u) - p(uc)) / (u - uc) = b + c2 (u + uc) + d (u^2 + u uc + uc^2),
    // integrated in u over [0, h].
    double h = x_[i + 1] - x_[i];
    double uc = c - x_[i];
    double term_b = b_[i] * h;
    double term_c = c_[i] * (h * h / 2.0 + uc * h);
    double term_d = d_[i] * (h * h * h / 3.0 + uc * h * h / 2.0 + uc * uc * h);
    return term_b + term_c + term_d;
}

double CubicSpline::integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    a = std::max(a, x_.front());
    b = std::min(b, x_.back());
    std::size_t ia = locate(a), ib = locate(b);
    auto partial = [&](std::size_t i, double lo, double hi) {
        auto prim = [&](double t) {
            double u = t - x_[i];
            return u * (y_[i] +
                        u * (b_[i] / 2.0 + u * (c_[i] / 3.0 + u * d_[i] / 4.0)));
        };
        return prim(hi) - prim(lo);
    };
    if (ia == ib) return partial(ia, a, b);
    double s = partial(ia, a, x_[ia + 1]);
    for (std::size_t i = ia + 1; i < ib; ++i) s += panel_integral(i);
    s += partial(ib, x_[ib], b);
    return s;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw GridError("interpolant needs at least two samples");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(x_[i + 1] > x_[i]))
            throw GridError("interpolant abscissae must be strictly ascending");

    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

    m_.resize(n);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0)
            m_[i] = 0.0;
        else
            m_[i] = 2.0 / (1.0 / d[i - 1] + 1.0 / d[i]);  // harmonic mean
    }
    // Fritsch-Carlson limiter.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            m_[i] = m_[i + 1] = 0.0;
            continue;
        }
        double a = m_[i] / d[i], b = m_[i + 1] / d[i];
        double s = a * a + b * b;
        if (s > 9.0) {
            double t = 3.0 / std::sqrt(s);
            m_[i] = t * a * d[i];
            m_[i + 1] = t * b * d[i];
        }
    }
}

std::size_t MonotoneCubic::locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    if (it == x_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double t) const {
    if (t < x_.front() || t > x_.back())
        return clamp_zero_ ? 0.0 : (t < x_.front() ? y_.front() : y_.back());
    std::size_t i = locate(t);
    double h = x_[i + 1] - x_[i];
    double u = (t - x_[i]) / h;
    double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    double h10 = u * (1 - u) * (1 - u);
    double h01 = u * u * (3 - 2 * u);
    double h11 = u * u * (u - 1);
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::derivative(double t) const {
    if (t < x_.front() || t > x_.back()) return 0.0;
    std::size_t i = locate(t);
    double h = x_[i + 1] - x_[i];
    double u = (t - x_[i]) / h;
    double dh00 = 6 * u * (u - 1);
    double dh10 = (1 - u) * (1 - 3 * u);
    double dh01 = -dh00;
    double dh11 = u * (3 * u - 2);
    return (dh00 * y_[i] + dh01 * y_[i + 1]) / h + dh10 * m_[i] + dh11 * m_[i + 1];
}

double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw DomainError("brent_root: endpoints do not bracket");
    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa, s = b, fs = fb, d = 0.0;
    bool mflag = true;
    for (int it = 0; it < max_iter; ++it) {
        if (fb == 0.0 || std::abs(b - a) < tol) return b;
        if (fa != fc && fb != fc) {
            s = a * fb * fc / ((fa - fb) * (fa - fc)) +
                b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        double lo = (3 * a + b) / 4, hi = b;
        if (lo > hi) std::swap(lo, hi);
        bool bad = (s < lo || s > hi) ||
                   (mflag && std::abs(s - b) >= std::abs(b - c) / 2) ||
                   (!mflag && std::abs(s - b) >= std::abs(c - d) / 2) ||
                   (mflag && std::abs(b - c) < tol) ||
                   (!mflag && std::abs(c - d) < tol);
        if (bad) {
            s = (a + b) / 2;
            mflag = true;
        } else {
            mflag = false;
        }
        fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if (fa * fs < 0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if (std::abs(fa) < std::abs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
    }
    return b;
}

double unwrap_angles(std::vector<double>& angles) {
    double offset = 0.0, max_jump = 0.0;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        double raw = angles[i] + offset;
        double diff = std::remainder(raw - angles[i - 1], 2.0 * M_PI);
        offset += angles[i - 1] + diff - raw;
        angles[i] = angles[i - 1] + diff;
        max_jump = std::max(max_jump, std::abs(diff));
    }
    return max_jump;
}

bool fit_power_law(std::span<const double> x, std::span<const double> y,
                   int n_fit, double& coeff, double& exponent) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || y.size() != x.size()) return false;
    n_fit = std::min(n_fit, n);
    int start = n - n_fit;
    double sign = 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int i = start; i < n; ++i) {
        if (y[i] == 0.0 || x[i] <= 0.0) continue;
        double s = y[i] > 0 ? 1.0 : -1.0;
        if (sign == 0.0) sign = s;
        if (s != sign) return false;
        double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2 || sign == 0.0) return false;
    double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return false;
    exponent = (m * sxy - sx * sy) / denom;
    coeff = sign * std::exp((sy - exponent * sx) / m);
    return std::isfinite(exponent) && std::isfinite(coeff);
}

void numerov_forward(std::span<const double> w, double h,
                     std::span<std::complex<double>> u) {
    const double h2 = h * h;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        u[i + 1] = (u[i] * (2.0 + 5.0 * h2 * w[i] / 6.0) -
                    u[i - 1] * (1.0 - h2 * w[i - 1] / 12.0)) /
                   (1.0 - h2 * w[i + 1] / 12.0);
    }
}

void numerov_forward_real(std::span<const double> w, double h,
                          std::span<double> u) {
    const double h2 = h * h;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        u[i + 1] = (u[i] * (2.0 + 5.0 * h2 * w[i] / 6.0) -
                    u[i - 1] * (1.0 - h2 * w[i - 1] / 12.0)) /
                   (1.0 - h2 * w[i + 1] / 12.0);
    }
}

double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    if (l == 1) return x;
    double p0 = 1.0, p1 = x;
    for (int n = 2; n <= l; ++n) {
        double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

void riccati_bessel(int l_max, double x, std::vector<double>& sj,
                    std::vector<double>& sy) {
    sj.assign(l_max + 1, 0.0);
    sy.assign(l_max + 1, 0.0);
    if (x <= 0.0) throw DomainError("riccati_bessel: x must be positive");

    // Irregular family: upward recurrence is always stable.
    double y0 = -std::cos(x), y1 = -std::cos(x) / x - std::sin(x);
    sy[0] = y0;
    if (l_max >= 1) sy[1] = y1;
    for (int l = 1; l < l_max; ++l) {
        double y2 = (2.0 * l + 1.0) / x * sy[l] - sy[l - 1];
        sy[l + 1] = y2;
    }

    // Regular family: downward (Miller) recurrence normalized at low order.
    // The seed must sit well above BOTH l_max and the turning point l ~ x,
    // deep in the decaying regime.
    double top = std::max(static_cast<double>(l_max), x);
    int l_start = static_cast<int>(std::ceil(top)) + 20 +
                  static_cast<int>(std::ceil(15.0 * std::cbrt(x + 1.0)));
    std::vector<double> tmp(l_start + 2, 0.0);
    tmp[l_start + 1] = 0.0;
    tmp[l_start] = 1e-280;
    for (int l = l_start; l >= 1; --l) {
        tmp[l - 1] = (2.0 * l + 1.0) / x * tmp[l] - tmp[l + 1];
        if (std::abs(tmp[l - 1]) > 1e250) {
            for (int j = l - 1; j <= l_start + 1; ++j) tmp[j] *= 1e-250;
        }
    }
    // Normalize against whichever low-order value is better conditioned
    // (sin x and sin x / x - cos x never vanish together).
    double ref0 = std::sin(x);
    double ref1 = std::sin(x) / x - std::cos(x);
    double scale = std::abs(ref0) > 0.1 ? ref0 / tmp[0] : ref1 / tmp[1];
    for (int l = 0; l <= l_max; ++l) sj[l] = tmp[l] * scale;
}

std::vector<double> tridiag_lowest_eigenvalues(std::span<const double> diag,
                                               std::span<const double> offdiag,
                                               int n_lowest) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    if (n_lowest > n) throw DomainError("tridiag: n_lowest exceeds dimension");
    std::vector<double> d(diag.begin(), diag.end());
    std::vector<double> e(offdiag.begin(), offdiag.end());
    std::vector<double> w(n);
    std::vector<lapack_int> iblock(n), isplit(n);
    lapack_int m = 0, nsplit = 0;
    lapack_int info = LAPACKE_dstebz(
        'I', 'E', n, 0.0, 0.0, 1, n_lowest, 2.0 * LAPACKE_dlamch('S'), d.data(),
        e.data(), &m, &nsplit, w.data(), iblock.data(), isplit.data());
    if (info != 0)
        throw ResolutionError("tridiagonal eigenvalue bisection failed, info=" +
                              std::to_string(info));
    if (m < n_lowest)
        throw MissedLevelError("bisection returned fewer eigenvalues than asked");
    w.resize(n_lowest);
    std::sort(w.begin(), w.end());
    return w;
}

int thread_count() {
    if (const char* env = std::getenv("SCATTER_TRACE_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    int workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace scatter_trace
