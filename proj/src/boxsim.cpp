#include "scatter_trace/boxsim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "scatter_trace/errors.hpp"
#include "scatter_trace/numerics.hpp"
#include "scatter_trace/parallel.hpp"

namespace scatter_trace {

namespace {

// ---- delta potential: exact matching conditions ----

std::vector<double> delta_box_levels(const PotentialModel& model, double L,
                                     int n_max) {
    std::vector<double> levels;
    levels.reserve(2 * n_max);
    // Odd sector never sees the delta: k = n pi / L.
    for (int n = 1; n <= n_max; ++n)
        levels.push_back(n * M_PI / L);
    // Even sector: 2k cos(kL) + g(k) sin(kL) = 0, one root per bracket
    // ((2m+1) pi/2L, (2m+2) pi/2L).
    auto F = [&](double k) {
        return 2.0 * k * std::cos(k * L) +
               model.delta_strength(k) * std::sin(k * L);
    };
    for (int m = 0; m <= n_max; ++m) {
        double a = (2 * m + 1) * M_PI / (2.0 * L) + 1e-14;
        double b = (2 * m + 2) * M_PI / (2.0 * L) - 1e-14;
        levels.push_back(brent_root(F, a, b, 1e-14 / L));
    }
    std::sort(levels.begin(), levels.end());
    levels.resize(n_max);
    return levels;
}

// ---- finite differences ----

struct FdGrid {
    double h;
    std::vector<double> shape;  // potential shape at interior points
    std::vector<double> centrifugal;
};

FdGrid make_grid_1d(const PotentialModel& model, double L, double h) {
    int n = static_cast<int>(std::round(2.0 * L / h)) - 1;
    FdGrid g;
    g.h = 2.0 * L / (n + 1);
    g.shape.resize(n);
    for (int i = 0; i < n; ++i)
        g.shape[i] = model.shape(-L + (i + 1) * g.h);
    return g;
}

FdGrid make_grid_radial(const PotentialModel& model, int l, double R,
                        double h) {
    int n = static_cast<int>(std::round(R / h)) - 1;
    FdGrid g;
    g.h = R / (n + 1);
    g.shape.resize(n);
    g.centrifugal.resize(n);
    for (int i = 0; i < n; ++i) {
        double r = (i + 1) * g.h;
        g.shape[i] = model.shape(r);
        g.centrifugal[i] = l * (l + 1) / (r * r);
    }
    return g;
}

// Lowest n eigenvalues of -u'' + (coupling*shape + centrifugal) u = lambda u.
std::vector<double> fd_eigen(const FdGrid& g, double coupling, int n_lowest) {
    const std::size_t n = g.shape.size();
    std::vector<double> diag(n), off(n - 1, -1.0 / (g.h * g.h));
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 2.0 / (g.h * g.h) + coupling * g.shape[i];
        if (!g.centrifugal.empty()) diag[i] += g.centrifugal[i];
    }
    return tridiag_lowest_eigenvalues(diag, off, n_lowest);
}

// Richardson pair (h, h/2) of FD eigenvalues. The leading error is O(h^2);
// after extrapolation the residual is O(h^4), estimated per level from the
// size of the correction times the next-order ratio (k h)^2.
struct FdLevels {
    std::vector<double> lambda;   // extrapolated
    double k_error = 0.0;         // max estimated eigen-wavenumber error
};

FdLevels fd_levels(const std::function<FdGrid(double)>& grid_at, double h,
                   double coupling, int n_lowest) {
    FdGrid coarse = grid_at(h);
    FdGrid fine = grid_at(h / 2.0);
    std::vector<double> lc = fd_eigen(coarse, coupling, n_lowest);
    std::vector<double> lf = fd_eigen(fine, coupling, n_lowest);
    FdLevels out;
    out.lambda.resize(n_lowest);
    for (int i = 0; i < n_lowest; ++i) {
        out.lambda[i] = (4.0 * lf[i] - lc[i]) / 3.0;
        double k = std::sqrt(std::max(out.lambda[i], 1e-30));
        double correction = std::abs(lf[i] - lc[i]) / 3.0;
        double ratio = std::max((k * h) * (k * h) / 8.0, 1e-4);
        out.k_error = std::max(out.k_error, correction * ratio / (2.0 * k));
    }
    return out;
}

double fd_step(const PotentialModel& model, double k_top) {
    double scale = std::max(model.support_radius(1e-3), 0.5);
    return std::min(scale / 35.0, 0.12 / std::max(k_top, 0.5));
}

// ---- shooting (Numerov), used as an independent cross-check ----

double shoot_1d(const PotentialModel& model, double L, double k, double h) {
    int n = static_cast<int>(std::ceil(2.0 * L / h)) + 1;
    double hh = 2.0 * L / (n - 1);
    std::vector<double> w(n), u(n);
    for (int i = 0; i < n; ++i) {
        double x = -L + i * hh;
        w[i] = model.evaluate(x, k) - k * k;
    }
    u[0] = 0.0;
    u[1] = hh;
    numerov_forward_real(w, hh, u);
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    return u[n - 1] / umax;
}

std::vector<double> shooting_box_levels(const PotentialModel& model, double L,
                                        int n_max) {
    double k_top = (n_max + 1) * M_PI / (2.0 * L);
    double h = fd_step(model, k_top) * 0.5;
    std::vector<double> levels(n_max);
    parallel_for(n_max, [&](std::size_t idx) {
        int n = static_cast<int>(idx) + 1;
        double a = n * M_PI / (2.0 * L) * (1.0 + 1e-12);
        double b = (n + 1) * M_PI / (2.0 * L) * (1.0 - 1e-12);
        auto F = [&](double k) { return shoot_1d(model, L, k, h); };
        double fa = F(a), fb = F(b);
        if (fa == 0.0) {
            levels[idx] = a;
        } else if (fa * fb < 0.0) {
            levels[idx] = brent_root(F, a, b, 1e-12 / L);
        } else {
            // level sits at the free position (odd sector of a symmetric
            // potential): the shot vanishes there to discretization error
            levels[idx] = a;
        }
    });
    return levels;
}

void check_interlacing(const std::vector<double>& levels, double L,
                       double slack) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        double free_k = (i + 1) * M_PI / (2.0 * L);
        if (levels[i] < free_k - slack)
            throw MissedLevelError(
                "box level " + std::to_string(i + 1) +
                " fell below the free level; eigenvalue count is off");
        if (i > 0 && levels[i] <= levels[i - 1])
            throw MissedLevelError("box levels are not strictly increasing");
    }
}

// Maximum of the k-dependent coupling over k >= 0.
double coupling_max(const PotentialModel& model) {
    if (model.kind() != PotentialKind::dielectric) return model.coupling(0.0);
    const auto& d = model.dispersion();
    double k_star = d.k_c / std::sqrt(static_cast<double>(d.p) - 1.0);
    return model.coupling(k_star);
}

// Dispersive levels: quadratic fit of lambda_n(c) through c = 0, c_max/2,
// c_max, then per-level root of k^2 = lambda_n(c(k)). Also yields the free
// levels (the c = 0 sample).
struct DispersiveLevels {
    std::vector<double> k;       // interacting levels
    std::vector<double> k_free;  // c = 0 levels of the same discretization
    double residual = 0.0;
};

DispersiveLevels dispersive_levels(const PotentialModel& model,
                                   const std::function<FdGrid(double)>& grid_at,
                                   double h, int n_lowest) {
    double cmax = coupling_max(model);
    FdLevels l0 = fd_levels(grid_at, h, 0.0, n_lowest);
    FdLevels l1 = fd_levels(grid_at, h, 0.5 * cmax, n_lowest);
    FdLevels l2 = fd_levels(grid_at, h, cmax, n_lowest);

    DispersiveLevels out;
    out.residual = std::max({l0.k_error, l1.k_error, l2.k_error});
    out.k.resize(n_lowest);
    out.k_free.resize(n_lowest);
    for (int i = 0; i < n_lowest; ++i) {
        double a0 = l0.lambda[i];
        double a1 = (-3.0 * l0.lambda[i] + 4.0 * l1.lambda[i] - l2.lambda[i]) /
                    cmax;
        double a2 = 2.0 * (l0.lambda[i] - 2.0 * l1.lambda[i] + l2.lambda[i]) /
                    (cmax * cmax);
        auto lam = [&](double c) { return a0 + c * (a1 + c * a2); };
        out.k_free[i] = std::sqrt(std::max(a0, 0.0));
        auto F = [&](double k) { return k * k - lam(model.coupling(k)); };
        double lo = out.k_free[i] * (1.0 - 1e-12);
        double hi = std::sqrt(std::max(lam(cmax), 0.0)) + 1e-12;
        if (F(lo) > 0.0)
            out.k[i] = lo;  // coupling vanished at this level already
        else
            out.k[i] = brent_root(F, lo, hi, 1e-13);
    }
    return out;
}

double extrapolate_inv_length(
    const std::vector<std::pair<double, double>>& per_length, double& error) {
    const std::size_t n = per_length.size();
    auto pair_c0 = [&](std::size_t i, std::size_t j) {
        double Li = per_length[i].first, Lj = per_length[j].first;
        double si = per_length[i].second, sj = per_length[j].second;
        return (Lj * sj - Li * si) / (Lj - Li);
    };
    double c0 = pair_c0(n - 2, n - 1);
    double c0_prev = pair_c0(n - 3, n - 2);
    error = std::abs(c0 - c0_prev);
    double scale = std::max(std::abs(c0), 1e-300);
    if (error > 0.75 * scale && scale > 1e-10)
        throw ExtrapolationError(
            "mode sums do not follow the c0 + c1/L model across the box "
            "sizes");
    return c0;
}

}  // namespace

std::vector<double> free_box_levels(double L, int n_max) {
    std::vector<double> v(n_max);
    for (int n = 1; n <= n_max; ++n) v[n - 1] = n * M_PI / (2.0 * L);
    return v;
}

BoxSpectrum box_spectrum(const PotentialModel& model, double L, int n_max,
                         BoxMethod method, double tol) {
    if (!(L > 0.0) || n_max < 1)
        throw DomainError("box_spectrum: need L > 0 and n_max >= 1");
    double support = model.support_radius(1e-10);
    if (L < 2.0 * support)
        throw DomainError("box_spectrum: box must be larger than the support");

    BoxSpectrum out;
    out.L = L;
    out.method = method;

    if (model.kind() == PotentialKind::delta) {
        out.eigen_k = delta_box_levels(model, L, n_max);
        out.resolution_error = 1e-13;
        return out;
    }

    if (method == BoxMethod::shooting) {
        // each trial k evaluates V(x, k), so a k-dependent potential is
        // handled exactly by the root find
        out.eigen_k = shooting_box_levels(model, L, n_max);
        out.resolution_error = 1e-9;
        check_interlacing(out.eigen_k, L, 1e-6);
        return out;
    }

    double k_top = (n_max + 2) * M_PI / (2.0 * L);
    double h = fd_step(model, k_top);
    auto grid_at = [&](double hh) { return make_grid_1d(model, L, hh); };

    if (model.dispersive()) {
        DispersiveLevels dl = dispersive_levels(model, grid_at, h, n_max);
        out.eigen_k = dl.k;
        out.resolution_error = dl.residual;
    } else {
        FdLevels fl = fd_levels(grid_at, h, model.coupling(0.0), n_max);
        out.eigen_k.resize(n_max);
        for (int i = 0; i < n_max; ++i)
            out.eigen_k[i] = std::sqrt(std::max(fl.lambda[i], 0.0));
        out.resolution_error = fl.k_error;
    }
    if (out.resolution_error > tol)
        throw ResolutionError("box discretization error " +
                              std::to_string(out.resolution_error) +
                              " exceeds tol");
    check_interlacing(out.eigen_k, L, 100.0 * out.resolution_error + 1e-9);
    return out;
}

ModeSumResult mode_sum(const PotentialModel& model, const WeightFunction& phi,
                       std::span<const double> Ls, int n_max, double tol) {
    if (Ls.size() < 3)
        throw DomainError("mode_sum: need at least 3 box sizes");
    for (std::size_t i = 1; i < Ls.size(); ++i)
        if (!(Ls[i] > Ls[i - 1]))
            throw DomainError("mode_sum: box sizes must be ascending");

    ModeSumResult res;
    res.per_length.resize(Ls.size());
    parallel_for(Ls.size(), [&](std::size_t li) {
        double L = Ls[li];
        BoxSpectrum sp = box_spectrum(model, L, n_max, BoxMethod::matrix_fd,
                                      tol);
        std::vector<double> free = free_box_levels(L, n_max);
        double s = 0.0;
        for (int i = 0; i < n_max; ++i)
            s += phi.value(sp.eigen_k[i]) - phi.value(free[i]);
        // the sum must have converged in n within the resolved spectrum
        double last = 0.0;
        for (int i = std::max(0, n_max - 2); i < n_max; ++i)
            last = std::max(last, std::abs(phi.value(sp.eigen_k[i]) -
                                           phi.value(free[i])));
        if (last > 1e-4 * std::max(std::abs(s), 1e-12) * 0.5 + 1e-9)
            throw DomainError(
                "mode_sum: phi has not decayed within the resolved spectrum "
                "(raise n_max)");
        res.per_length[li] = {L, s};
    });
    res.value = extrapolate_inv_length(res.per_length, res.error);
    return res;
}

BoxSpectrum radial_box_spectrum(const PotentialModel& model, int l,
                                double R_box, int n_max, BoxMethod method,
                                double tol) {
    if (l < 0) throw DomainError("radial_box_spectrum: l must be >= 0");
    if (model.kind() == PotentialKind::delta)
        throw DomainError("delta potential has no radial realization");
    if (!(R_box > 2.0 * model.support_radius(1e-10)))
        throw DomainError("radial box must exceed the potential range");

    BoxSpectrum out;
    out.L = R_box;
    out.method = method;

    double k_top = (n_max + 2 + l) * M_PI / R_box;
    double h = fd_step(model, k_top);
    auto grid_at = [&](double hh) {
        return make_grid_radial(model, l, R_box, hh);
    };

    if (method == BoxMethod::shooting) {
        out.eigen_k = [&] {
            std::vector<double> ks(n_max);
            double hs = h * 0.5;
            auto F = [&](double k) {
                int n = static_cast<int>(std::ceil(R_box / hs)) + 1;
                double hh = R_box / (n - 1);
                std::vector<double> w(n), u(n);
                for (int i = 1; i < n; ++i) {
                    double r = i * hh;
                    w[i] = model.evaluate(r, k) + l * (l + 1) / (r * r) -
                           k * k;
                }
                w[0] = w[1];
                u[0] = 0.0;
                u[1] = std::pow(hh, l + 1.0);
                numerov_forward_real(w, hh, u);
                double umax = 0.0;
                for (double v : u) umax = std::max(umax, std::abs(v));
                return u[n - 1] / umax;
            };
            // free radial levels bracket the interacting ones from below
            std::vector<double> free_k = fd_levels(grid_at, h, 0.0, n_max + 1)
                                             .lambda;
            for (double& lam : free_k) lam = std::sqrt(std::max(lam, 0.0));
            for (int i = 0; i < n_max; ++i) {
                double a = free_k[i], b = free_k[i + 1] - 1e-12;
                double fa = F(a), fb = F(b);
                if (fa * fb < 0.0)
                    ks[i] = brent_root(F, a, b, 1e-12);
                else
                    ks[i] = a;
            }
            return ks;
        }();
        out.resolution_error = 1e-8;
        return out;
    }

    if (model.dispersive()) {
        DispersiveLevels dl = dispersive_levels(model, grid_at, h, n_max);
        out.eigen_k = dl.k;
        out.resolution_error = dl.residual;
    } else {
        FdLevels fl = fd_levels(grid_at, h, model.coupling(0.0), n_max);
        out.eigen_k.resize(n_max);
        for (int i = 0; i < n_max; ++i)
            out.eigen_k[i] = std::sqrt(std::max(fl.lambda[i], 0.0));
        out.resolution_error = fl.k_error;
    }
    if (out.resolution_error > tol)
        throw ResolutionError("radial discretization error too large");
    return out;
}

ModeSumResult radial_mode_sum(const PotentialModel& model,
                              const WeightFunction& phi, int l_max,
                              std::span<const double> R_boxes, double k_cut,
                              double tol) {
    if (R_boxes.size() < 3)
        throw DomainError("radial_mode_sum: need at least 3 box radii");
    (void)tol;

    ModeSumResult res;
    res.per_length.resize(R_boxes.size());

    std::vector<std::vector<double>> per_channel(R_boxes.size());
    for (auto& v : per_channel) v.assign(l_max + 1, 0.0);

    struct Job {
        std::size_t ir;
        int l;
    };
    std::vector<Job> jobs;
    for (std::size_t ir = 0; ir < R_boxes.size(); ++ir)
        for (int l = 0; l <= l_max; ++l) jobs.push_back({ir, l});

    parallel_for(jobs.size(), [&](std::size_t ji) {
        const Job job = jobs[ji];
        double R = R_boxes[job.ir];
        int n_levels = static_cast<int>(std::ceil(k_cut * R / M_PI)) + 3;
        double h = fd_step(model, k_cut * 1.2);
        auto grid_at = [&](double hh) {
            return make_grid_radial(model, job.l, R, hh);
        };

        std::vector<double> kv, k0;
        if (model.dispersive()) {
            DispersiveLevels dl =
                dispersive_levels(model, grid_at, h, n_levels);
            kv = std::move(dl.k);
            k0 = std::move(dl.k_free);
        } else {
            FdLevels lv = fd_levels(grid_at, h, model.coupling(0.0), n_levels);
            FdLevels l0 = fd_levels(grid_at, h, 0.0, n_levels);
            kv.resize(n_levels);
            k0.resize(n_levels);
            for (int i = 0; i < n_levels; ++i) {
                kv[i] = std::sqrt(std::max(lv.lambda[i], 0.0));
                k0[i] = std::sqrt(std::max(l0.lambda[i], 0.0));
            }
        }
        double s = 0.0;
        for (int i = 0; i < n_levels; ++i) {
            if (k0[i] > k_cut) break;
            s += phi.value(kv[i]) - phi.value(k0[i]);
        }
        per_channel[job.ir][job.l] = (2.0 * job.l + 1.0) * s;
    });

    for (std::size_t ir = 0; ir < R_boxes.size(); ++ir) {
        double total = 0.0;
        for (double v : per_channel[ir]) total += v;
        res.per_length[ir] = {R_boxes[ir], total};
    }
    res.value = extrapolate_inv_length(res.per_length, res.error);
    return res;
}

}  // namespace scatter_trace
