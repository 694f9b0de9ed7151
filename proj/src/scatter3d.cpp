#include "scatter_trace/scatter3d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "scatter_trace/errors.hpp"
#include "scatter_trace/numerics.hpp"
#include "scatter_trace/parallel.hpp"

namespace scatter_trace {

namespace {

using complexd = std::complex<double>;
const complexd I(0.0, 1.0);

// RK4 on (u, u') for u'' = w(r) u with a geometrically graded step near the
// origin (resolves u ~ r^{l+1}) and a wavelength-limited step in the bulk.
// Returns (u, u') at r_match, rescaled on the way to avoid overflow; only
// the direction of (u, u') is meaningful.
struct RadialShot {
    double u, up;
};

RadialShot integrate_radial(const PotentialModel& model, double k, int l,
                            double r_match, double h_bulk) {
    const double r0 = 1e-6 * std::max(r_match, 1.0);
    double r = r0;
    double u = 1.0;  // overall scale is arbitrary; start from r0^{l+1}=:1
    double c2 = (model.shape(0.0) * model.coupling(k) - k * k) / (4.0 * l + 6.0);
    double up = u * ((l + 1.0) / r0 + 2.0 * c2 * r0 / (1.0 + c2 * r0 * r0));

    // A slab edge is a jump in V: integrate each smooth segment separately,
    // with the evaluator taking the segment's one-sided limit at the edge.
    const bool slab = model.kind() == PotentialKind::square_barrier;
    const double edge = slab ? model.param_width() : -1.0;
    const double ratio = std::min(0.1, 0.15 / (l + 1.0));

    std::vector<double> targets;
    if (slab && edge > r0 && edge < r_match) targets.push_back(edge);
    targets.push_back(r_match);

    for (double target : targets) {
        // one-sided potential for this segment
        auto w = [&](double rr) {
            double v;
            if (slab)
                v = target <= edge ? model.coupling(k) * model.param_height()
                                   : (rr < edge ? model.coupling(k) *
                                                      model.param_height()
                                                : 0.0);
            else
                v = model.evaluate(rr, k);
            return v + l * (l + 1.0) / (rr * rr) - k * k;
        };
        while (r < target) {
            double h = std::min(ratio * r, h_bulk);
            if (r + h > target) h = target - r;
            double k1u = up, k1v = w(r) * u;
            double k2u = up + 0.5 * h * k1v,
                   k2v = w(r + 0.5 * h) * (u + 0.5 * h * k1u);
            double k3u = up + 0.5 * h * k2v,
                   k3v = w(r + 0.5 * h) * (u + 0.5 * h * k2u);
            double k4u = up + h * k3v, k4v = w(r + h) * (u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            up += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if (std::abs(u) > 1e200 || std::abs(up) > 1e200) {
                u *= 1e-200;
                up *= 1e-200;
            }
            r += h;
        }
    }
    return {u, up};
}

// eta mod pi from the logarithmic derivative against Riccati-Bessel
// functions: tan eta = (k j^' u - u' j^) / (k y^' u - u' y^). The map
// (u, u') -> (num, den) is invertible (Wronskian), so the match never
// degenerates at wavefunction nodes.
double eta_from_shot(double k, int l, double r, double u, double up) {
    double x = k * r;
    std::vector<double> sj, sy;
    riccati_bessel(l, x, sj, sy);
    double jm1 = l == 0 ? std::cos(x) : sj[l - 1];   // j^_{l-1}
    double ym1 = l == 0 ? std::sin(x) : sy[l - 1];   // y^_{l-1}
    double djl = jm1 - l * sj[l] / x;
    double dyl = ym1 - l * sy[l] / x;
    double num = k * djl * u - up * sj[l];
    double den = k * dyl * u - up * sy[l];
    return std::atan(num / den);
}

double solve_eta(const PotentialModel& model, double k, int l, double tol) {
    double support = std::max(model.support_radius(1e-13), 0.5);
    double r_match = support + 0.25;
    double v_peak = model.param_height() * model.coupling(k);
    // per-step budget (k h)^4 * (k r) / 120 ~ 1e-5 keeps the Richardson
    // pair consistent at every k
    double kh = 0.2 / std::pow(std::max(k * r_match, 1.0), 0.25);
    double h = std::min({0.02 * std::max(model.support_radius(1e-3), 0.5),
                         kh / std::max(k, 0.5), 0.02,
                         0.35 / std::sqrt(v_peak + 1.0)});
    // two resolutions; the match converges at O(h^4)
    RadialShot a = integrate_radial(model, k, l, r_match, h);
    RadialShot b = integrate_radial(model, k, l, r_match, h / 2.0);
    double ea = eta_from_shot(k, l, r_match, a.u, a.up);
    double eb = eta_from_shot(k, l, r_match, b.u, b.up);
    // both values live mod pi; put them on the same branch before Richardson
    ea -= M_PI * std::round((ea - eb) / M_PI);
    double eta = (16.0 * eb - ea) / 15.0;
    // the extrapolated error is |eb - ea|/15
    if (std::abs(eb - ea) > std::max(1000.0 * tol, 3e-5))
        throw IntegrationError("radial solve did not converge at k=" +
                               std::to_string(k) + ", l=" + std::to_string(l));
    return eta;
}

}  // namespace

double SOperator::unitarity_defect() const {
    Eigen::MatrixXcd G =
        matrix.adjoint() * matrix -
        Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols());
    return G.cwiseAbs().maxCoeff();
}

PhaseShiftSpectrum phase_shifts(const PotentialModel& model, double k,
                                int l_max, double tol) {
    if (!(k > 0.0)) throw DomainError("phase_shifts: k must be > 0");
    if (model.kind() == PotentialKind::delta)
        throw DomainError("delta potential has no radial realization");

    double support = model.support_radius(1e-13);
    if (l_max < 0) l_max = static_cast<int>(std::ceil(k * support)) + 8;

    PhaseShiftSpectrum sp;
    sp.k = k;
    sp.l_max = l_max;
    sp.channels.resize(l_max + 1);
    for (int l = 0; l <= l_max; ++l)
        sp.channels[l] = {l, 2 * l + 1, solve_eta(model, k, l, tol)};

    // completeness of the channel truncation; l_max = 0 is a deliberate
    // single-channel request and skips the check
    double eta_top = std::abs(sp.channels.back().eta);
    if (l_max >= 1 && eta_top >= tol)
        throw TruncationError(
            "phase shift at l_max is still " + std::to_string(eta_top) +
            "; raise l_max or loosen tol");
    return sp;
}

std::vector<PhaseShiftSpectrum> phase_shifts_grid(
    const PotentialModel& model, std::span<const double> kgrid, int l_max,
    double tol) {
    if (kgrid.empty()) return {};
    // exclusion radius for the channel count: where V is already below the
    // scale that could move eta_l past rounding
    double support = model.support_radius(1e-6);
    if (l_max < 0)
        l_max = static_cast<int>(std::ceil(kgrid.back() * support)) + 8;

    std::vector<PhaseShiftSpectrum> out(kgrid.size());
    parallel_for(kgrid.size(), [&](std::size_t i) {
        out[i] = phase_shifts(model, kgrid[i], l_max, tol);
    });

    // Continuous branch per channel. The anchor is the lowest grid point,
    // where eta_l is assumed within (-pi/2, pi/2): with no bound states
    // eta_l(0) = 0, so any grid starting at small k satisfies this.
    for (int l = 0; l <= l_max; ++l) {
        std::vector<double> twice(out.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            twice[i] = 2.0 * out[i].channels[l].eta;
        double jump = unwrap_angles(twice);
        if (jump > 0.9 * M_PI)
            throw BranchError("eta_" + std::to_string(l) +
                              " cannot be unwrapped on this k-grid");
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i].channels[l].eta = twice[i] / 2.0;
    }
    return out;
}

std::complex<double> amplitude(const PhaseShiftSpectrum& spectrum,
                               double cos_theta) {
    if (!(std::abs(cos_theta) <= 1.0))
        throw DomainError("amplitude: |cos theta| must be <= 1");
    if (spectrum.l_max < 0)
        throw DomainError("amplitude needs a partial-wave spectrum");
    complexd sum = 0.0;
    for (const auto& ch : spectrum.channels) {
        complexd s = std::exp(2.0 * I * ch.eta) - 1.0;
        sum += static_cast<double>(ch.degeneracy) * s *
               legendre_p(ch.label, cos_theta);
    }
    return sum / (2.0 * I * spectrum.k);
}

CrossSection cross_section(const PhaseShiftSpectrum& spectrum) {
    CrossSection cs;
    cs.k = spectrum.k;
    cs.per_channel.reserve(spectrum.channels.size());
    double pref = 4.0 * M_PI / (spectrum.k * spectrum.k);
    for (const auto& ch : spectrum.channels) {
        double s = std::sin(ch.eta);
        double v = pref * ch.degeneracy * s * s;
        cs.per_channel.push_back(v);
        cs.sigma_bar += v;
    }
    return cs;
}

double hs_norm_squared(const PhaseShiftSpectrum& spectrum) {
    double sum = 0.0;
    for (const auto& ch : spectrum.channels) {
        double s = std::sin(ch.eta);
        sum += 4.0 * ch.degeneracy * s * s;
    }
    return sum;
}

double hs_norm_squared(const SOperator& op) {
    Eigen::MatrixXcd d =
        op.matrix -
        Eigen::MatrixXcd::Identity(op.matrix.rows(), op.matrix.cols());
    return d.squaredNorm();
}

std::complex<double> log_det1(const PhaseShiftSpectrum& spectrum) {
    complexd sum = 0.0;
    for (const auto& ch : spectrum.channels)
        sum += static_cast<double>(ch.degeneracy) *
               (2.0 * I * ch.eta - (std::exp(2.0 * I * ch.eta) - 1.0));
    return sum;
}

std::complex<double> log_det1(const SOperator& op) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, false);
    if (es.info() != Eigen::Success)
        throw IntegrationError("eigendecomposition of S failed");
    complexd sum = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        complexd lam = es.eigenvalues()[i];
        if (std::abs(std::abs(lam) - 1.0) > 1e-8)
            throw UnitarityError("S eigenvalue off the unit circle by " +
                                 std::to_string(std::abs(lam) - 1.0));
        double eta = 0.5 * std::arg(lam);  // principal branch
        sum += 2.0 * I * eta - (lam - 1.0);
    }
    return sum;
}

std::complex<double> trace_f(const PhaseShiftSpectrum& spectrum) {
    complexd sum = 0.0;
    for (const auto& ch : spectrum.channels)
        sum += static_cast<double>(ch.degeneracy) *
               (std::exp(2.0 * I * ch.eta) - 1.0);
    return sum / (2.0 * I * spectrum.k);
}

Det1BoundReport det1_bound_report(const PhaseShiftSpectrum& spectrum) {
    Det1BoundReport rep;
    rep.lhs = std::abs(log_det1(spectrum));
    double k = spectrum.k;
    rep.rhs = k * k * cross_section(spectrum).sigma_bar / (2.0 * M_PI);
    rep.violated = rep.lhs >= rep.rhs;
    for (const auto& ch : spectrum.channels)
        rep.max_abs_eta = std::max(rep.max_abs_eta, std::abs(ch.eta));
    return rep;
}

SOperator soperator_from_phases(const PhaseShiftSpectrum& spectrum) {
    if (spectrum.l_max < 0)
        throw DomainError("need a partial-wave spectrum to build S on (l,m)");
    SOperator op;
    op.k = spectrum.k;
    op.l_max = spectrum.l_max;
    int dim = op.dim();
    op.matrix = Eigen::MatrixXcd::Zero(dim, dim);
    int idx = 0;
    for (int l = 0; l <= spectrum.l_max; ++l) {
        complexd lam = std::exp(2.0 * I * spectrum.channels[l].eta);
        for (int m = -l; m <= l; ++m) op.matrix(idx, idx) = lam, ++idx;
    }
    return op;
}

// ---------- file format ----------

void save_soperator(const std::string& path,
                    std::span<const SOperator> operators,
                    double unitarity_tol) {
    if (operators.empty()) throw DomainError("save_soperator: no operators");
    for (const auto& op : operators)
        if (op.l_max != operators.front().l_max ||
            op.matrix.rows() != op.dim() || op.matrix.cols() != op.dim())
            throw DomainError("save_soperator: inconsistent dimensions");
    nlohmann::json j;
    j["l_max"] = operators.front().l_max;
    j["k_count"] = operators.size();
    j["unitarity_tol"] = unitarity_tol;
    j["basis"] = "(l,m) lexicographic";
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& op : operators) {
        nlohmann::json rec;
        rec["k"] = op.k;
        auto& m = rec["matrix"] = nlohmann::json::array();
        for (Eigen::Index r = 0; r < op.matrix.rows(); ++r)
            for (Eigen::Index c = 0; c < op.matrix.cols(); ++c)
                m.push_back({op.matrix(r, c).real(), op.matrix(r, c).imag()});
        recs.push_back(std::move(rec));
    }
    std::ofstream f(path);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << j.dump(1) << "\n";
}

void save_soperator_compact(const std::string& path,
                            std::span<const PhaseShiftSpectrum> spectra,
                            double unitarity_tol) {
    if (spectra.empty()) throw DomainError("save_soperator: no spectra");
    nlohmann::json j;
    j["l_max"] = spectra.front().l_max;
    j["k_count"] = spectra.size();
    j["unitarity_tol"] = unitarity_tol;
    j["basis"] = "(l,m) lexicographic";
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& sp : spectra) {
        nlohmann::json rec;
        rec["k"] = sp.k;
        std::vector<double> etas;
        for (const auto& ch : sp.channels) etas.push_back(ch.eta);
        rec["phase_shifts"] = etas;
        recs.push_back(std::move(rec));
    }
    std::ofstream f(path);
    if (!f) throw FormatError("cannot open " + path + " for writing");
    f << j.dump(1) << "\n";
}

SOperatorFile load_soperator(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }

    SOperatorFile out;
    try {
        out.l_max = j.at("l_max").get<int>();
        out.unitarity_tol = j.at("unitarity_tol").get<double>();
        std::string basis = j.at("basis").get<std::string>();
        if (basis != "(l,m) lexicographic")
            throw FormatError(path + ": unknown basis \"" + basis + "\"");
        const auto& recs = j.at("records");
        if (recs.empty()) throw FormatError(path + ": no records");
        out.compact = recs.front().contains("phase_shifts");
        const int dim = (out.l_max + 1) * (out.l_max + 1);

        double prev_k = -1.0;
        for (const auto& rec : recs) {
            double k = rec.at("k").get<double>();
            if (!(k > prev_k))
                throw GridError(path + ": k records must be ascending");
            prev_k = k;
            if (out.compact) {
                auto etas = rec.at("phase_shifts").get<std::vector<double>>();
                if (static_cast<int>(etas.size()) != out.l_max + 1)
                    throw FormatError(path + ": phase_shifts length mismatch");
                PhaseShiftSpectrum sp;
                sp.k = k;
                sp.l_max = out.l_max;
                for (int l = 0; l <= out.l_max; ++l)
                    sp.channels.push_back({l, 2 * l + 1, etas[l]});
                out.spectra.push_back(std::move(sp));
            } else {
                const auto& m = rec.at("matrix");
                if (static_cast<int>(m.size()) != dim * dim)
                    throw FormatError(path + ": matrix size mismatch");
                SOperator op;
                op.k = k;
                op.l_max = out.l_max;
                op.matrix.resize(dim, dim);
                int idx = 0;
                for (int r = 0; r < dim; ++r)
                    for (int c = 0; c < dim; ++c) {
                        op.matrix(r, c) = complexd(m[idx][0].get<double>(),
                                                   m[idx][1].get<double>());
                        ++idx;
                    }
                double defect = op.unitarity_defect();
                if (defect > out.unitarity_tol)
                    throw UnitarityError(
                        path + ": S at k=" + std::to_string(k) +
                        " violates unitarity by " + std::to_string(defect));
                out.operators.push_back(std::move(op));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    if (!out.compact)
        out.spectra = track_eigenphases(out.operators, out.unitarity_tol);
    return out;
}

std::vector<PhaseShiftSpectrum> track_eigenphases(
    std::span<const SOperator> operators, double unitarity_tol) {
    std::vector<PhaseShiftSpectrum> out;
    if (operators.empty()) return out;
    const int dim = static_cast<int>(operators.front().matrix.rows());

    Eigen::MatrixXcd prev_vectors;
    std::vector<double> prev_phases;

    for (std::size_t j = 0; j < operators.size(); ++j) {
        const auto& op = operators[j];
        if (op.unitarity_defect() > unitarity_tol)
            throw UnitarityError("operator at k=" + std::to_string(op.k) +
                                 " violates unitarity");
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, true);
        if (es.info() != Eigen::Success)
            throw IntegrationError("eigendecomposition failed");
        Eigen::MatrixXcd vec = es.eigenvectors();
        std::vector<double> phase(dim);
        std::vector<int> order(dim);

        if (j == 0) {
            for (int i = 0; i < dim; ++i) {
                phase[i] = 0.5 * std::arg(es.eigenvalues()[i]);
                order[i] = i;
            }
            // deterministic starting order: ascending phase
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return phase[a] < phase[b];
            });
        } else {
            // assign each previous channel the unused column of maximal
            // overlap
            Eigen::MatrixXd overlap =
                (prev_vectors.adjoint() * vec).cwiseAbs();
            std::vector<bool> used(dim, false);
            for (int c = 0; c < dim; ++c) {
                int best = -1;
                double best_ov = -1.0;
                for (int i = 0; i < dim; ++i) {
                    if (used[i]) continue;
                    if (overlap(c, i) > best_ov) {
                        best_ov = overlap(c, i);
                        best = i;
                    }
                }
                if (best_ov < 0.5)
                    throw BranchError(
                        "eigenvector overlap too small to track channels "
                        "between adjacent k records (crossing or grid too "
                        "coarse)");
                used[best] = true;
                order[c] = best;
            }
            for (int i = 0; i < dim; ++i)
                phase[i] = 0.5 * std::arg(es.eigenvalues()[i]);
        }

        PhaseShiftSpectrum sp;
        sp.k = op.k;
        sp.l_max = -1;
        Eigen::MatrixXcd sorted_vec(dim, dim);
        for (int c = 0; c < dim; ++c) {
            double eta = phase[order[c]];
            if (j > 0) {
                // continuous branch: wrap into (prev - pi/2, prev + pi/2]
                double prev = prev_phases[c];
                while (eta - prev > M_PI / 2.0) eta -= M_PI;
                while (eta - prev <= -M_PI / 2.0) eta += M_PI;
            }
            sp.channels.push_back({c, 1, eta});
            sorted_vec.col(c) = vec.col(order[c]);
        }
        prev_vectors = sorted_vec;
        prev_phases.clear();
        for (const auto& ch : sp.channels) prev_phases.push_back(ch.eta);
        out.push_back(std::move(sp));
    }
    return out;
}

}  // namespace scatter_trace
