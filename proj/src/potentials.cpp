#include "scatter_trace/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "scatter_trace/errors.hpp"

namespace scatter_trace {

DispersionProfile DispersionProfile::lorentzian(double k_c, int p) {
    if (!(k_c > 0.0)) throw DomainError("dispersion cutoff k_c must be > 0");
    if (p < 1) throw DomainError("dispersion exponent p must be >= 1");
    DispersionProfile d;
    d.kind = DispersionKind::lorentzian_cutoff;
    d.k_c = k_c;
    d.p = p;
    return d;
}

PotentialModel PotentialModel::delta(double g) {
    PotentialModel m;
    m.kind_ = PotentialKind::delta;
    m.height_ = g;
    m.width_ = 0.0;
    m.validate();
    return m;
}

PotentialModel PotentialModel::square_barrier(double height, double width) {
    PotentialModel m;
    m.kind_ = PotentialKind::square_barrier;
    m.height_ = height;
    m.width_ = width;
    m.validate();
    return m;
}

PotentialModel PotentialModel::gaussian(double height, double width) {
    PotentialModel m;
    m.kind_ = PotentialKind::gaussian;
    m.height_ = height;
    m.width_ = width;
    m.validate();
    return m;
}

PotentialModel PotentialModel::sech2(double height, double width) {
    PotentialModel m;
    m.kind_ = PotentialKind::sech2;
    m.height_ = height;
    m.width_ = width;
    m.validate();
    return m;
}

PotentialModel PotentialModel::user_grid(std::vector<double> x,
                                         std::vector<double> v) {
    PotentialModel m;
    m.kind_ = PotentialKind::user_grid;
    for (double val : v)
        if (!(val >= 0.0))
            throw DomainError("user_grid potential values must be >= 0");
    m.grid_interp_.emplace(x, v);
    m.grid_x_ = std::move(x);
    m.grid_v_ = std::move(v);
    m.height_ = *std::max_element(m.grid_v_.begin(), m.grid_v_.end());
    m.width_ = m.grid_x_.back() - m.grid_x_.front();
    return m;
}

PotentialModel PotentialModel::dielectric(double chi0, double width,
                                          DispersionProfile dispersion) {
    if (dispersion.kind == DispersionKind::none || dispersion.p < 3)
        throw DomainError(
            "dielectric model needs a dispersion profile with p >= 3 so that "
            "k^2 V(x,k) -> 0");
    PotentialModel m;
    m.kind_ = PotentialKind::dielectric;
    m.height_ = chi0;
    m.width_ = width;
    m.dispersion_ = dispersion;
    m.validate();
    return m;
}

void PotentialModel::validate() const {
    if (!(height_ >= 0.0))
        throw DomainError("potential strength must be >= 0 (no bound states)");
    if (kind_ != PotentialKind::delta && !(width_ > 0.0))
        throw DomainError("potential width must be > 0");
    if (!std::isfinite(height_) || !std::isfinite(width_))
        throw DomainError("potential parameters must be finite");
}

PotentialModel PotentialModel::with_dispersion(
    DispersionProfile dispersion) const {
    if (kind_ == PotentialKind::dielectric && dispersion.p < 3)
        throw DomainError("dielectric model needs dispersion p >= 3");
    PotentialModel m = *this;
    m.dispersion_ = dispersion;
    return m;
}

PotentialModel PotentialModel::mirrored() const {
    PotentialModel m = *this;
    m.mirrored_ = !m.mirrored_;
    return m;
}

double PotentialModel::coupling(double k) const {
    double mult = dispersion_.multiplier(k);
    if (kind_ == PotentialKind::dielectric) return k * k * mult;
    return mult;
}

double PotentialModel::shape(double x) const {
    if (mirrored_) x = -x;
    switch (kind_) {
        case PotentialKind::delta:
            throw DomainError("delta potential cannot be sampled pointwise");
        case PotentialKind::square_barrier:
            // slab on [0, width]
            return (x >= 0.0 && x <= width_) ? height_ : 0.0;
        case PotentialKind::gaussian:
            return height_ * std::exp(-x * x / (width_ * width_));
        case PotentialKind::sech2: {
            double c = std::cosh(x / width_);
            return height_ / (c * c);
        }
        case PotentialKind::user_grid:
            return (*grid_interp_)(x);
        case PotentialKind::dielectric:
            return height_ * std::exp(-x * x / (width_ * width_));
    }
    return 0.0;
}

double PotentialModel::evaluate(double x, double k) const {
    if (!std::isfinite(x)) throw DomainError("evaluate: x must be finite");
    if (!(k >= 0.0)) throw DomainError("evaluate: k must be >= 0");
    double v = coupling(k) * shape(x);
    if (v < 0.0) throw DomainError("potential evaluated negative");
    return v;
}

double PotentialModel::support_radius(double tol) const {
    if (!(tol > 0.0)) throw DomainError("support_radius: tol must be > 0");
    // peak value of V(., 1)
    double peak = height_ * coupling(1.0);
    switch (kind_) {
        case PotentialKind::delta:
            return 0.0;
        case PotentialKind::square_barrier:
            return width_;
        case PotentialKind::gaussian:
        case PotentialKind::dielectric:
            if (peak <= tol) return 0.0;
            return width_ * std::sqrt(std::log(peak / tol));
        case PotentialKind::sech2:
            if (peak <= tol) return 0.0;
            return width_ * std::acosh(std::sqrt(peak / tol));
        case PotentialKind::user_grid: {
            double scale = dispersion_.multiplier(1.0);
            double x_max = 0.0;
            for (std::size_t i = 0; i < grid_x_.size(); ++i)
                if (grid_v_[i] * scale >= tol)
                    x_max = std::max(x_max, std::abs(grid_x_[i]));
            return x_max;
        }
    }
    return 0.0;
}

double PotentialModel::delta_strength(double k) const {
    if (kind_ != PotentialKind::delta)
        throw DomainError("delta_strength: model is not a delta potential");
    return height_ * dispersion_.multiplier(k);
}

double PotentialModel::integral_1d(double k) const {
    double c = coupling(k);
    switch (kind_) {
        case PotentialKind::delta:
            return height_ * dispersion_.multiplier(k);
        case PotentialKind::square_barrier:
            return c * height_ * width_;
        case PotentialKind::gaussian:
        case PotentialKind::dielectric:
            return c * height_ * width_ * std::sqrt(M_PI);
        case PotentialKind::sech2:
            return c * height_ * 2.0 * width_;
        case PotentialKind::user_grid: {
            auto f = [this](double x) { return (*grid_interp_)(x); };
            return c * integrate_adaptive(f, grid_x_.front(), grid_x_.back(),
                                          1e-12)
                       .value;
        }
    }
    return 0.0;
}

double PotentialModel::born_integral_3d(double k) const {
    double c = coupling(k);
    switch (kind_) {
        case PotentialKind::delta:
            throw DomainError("delta potential has no 3D radial realization");
        case PotentialKind::square_barrier:
            return c * height_ * 4.0 * M_PI * width_ * width_ * width_ / 3.0;
        case PotentialKind::gaussian:
        case PotentialKind::dielectric:
            // 4 pi int_0^inf V0 exp(-r^2/a^2) r^2 dr = V0 pi^(3/2) a^3
            return c * height_ * std::pow(M_PI, 1.5) * width_ * width_ * width_;
        case PotentialKind::sech2:
        case PotentialKind::user_grid: {
            auto f = [this](double r) { return shape(r) * r * r; };
            double r_max = kind_ == PotentialKind::user_grid
                               ? std::abs(grid_x_.back())
                               : width_ * 60.0;
            return c * 4.0 * M_PI *
                   integrate_adaptive(f, 0.0, r_max, 1e-12).value;
        }
    }
    return 0.0;
}

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::delta: return "delta";
        case PotentialKind::square_barrier: return "square_barrier";
        case PotentialKind::gaussian: return "gaussian";
        case PotentialKind::sech2: return "sech2";
        case PotentialKind::user_grid: return "user_grid";
        case PotentialKind::dielectric: return "dielectric";
    }
    return "?";
}

static PotentialKind kind_from_string(const std::string& s) {
    if (s == "delta") return PotentialKind::delta;
    if (s == "square_barrier") return PotentialKind::square_barrier;
    if (s == "gaussian") return PotentialKind::gaussian;
    if (s == "sech2") return PotentialKind::sech2;
    if (s == "user_grid") return PotentialKind::user_grid;
    if (s == "dielectric") return PotentialKind::dielectric;
    throw FormatError("unknown potential kind: " + s);
}

PotentialModel PotentialModel::from_json(const nlohmann::json& j) {
    if (!j.contains("kind")) throw FormatError("potential: missing \"kind\"");
    PotentialKind kind = kind_from_string(j.at("kind").get<std::string>());

    DispersionProfile disp;
    if (j.contains("dispersion") && !j.at("dispersion").is_null()) {
        const auto& dj = j.at("dispersion");
        std::string dk = dj.value("kind", "lorentzian_cutoff");
        if (dk == "none") {
            disp = DispersionProfile::none();
        } else if (dk == "lorentzian_cutoff") {
            disp = DispersionProfile::lorentzian(dj.at("k_c").get<double>(),
                                                 dj.value("p", 2));
        } else {
            throw FormatError("unknown dispersion kind: " + dk);
        }
    }

    try {
        switch (kind) {
            case PotentialKind::delta:
                return delta(j.at("g").get<double>()).with_dispersion(disp);
            case PotentialKind::square_barrier:
                return square_barrier(j.at("V0").get<double>(),
                                      j.at("a").get<double>())
                    .with_dispersion(disp);
            case PotentialKind::gaussian:
                return gaussian(j.at("V0").get<double>(), j.at("a").get<double>())
                    .with_dispersion(disp);
            case PotentialKind::sech2:
                return sech2(j.at("V0").get<double>(), j.at("a").get<double>())
                    .with_dispersion(disp);
            case PotentialKind::user_grid: {
                const auto& g = j.at("grid");
                return user_grid(g.at("x").get<std::vector<double>>(),
                                 g.at("v").get<std::vector<double>>())
                    .with_dispersion(disp);
            }
            case PotentialKind::dielectric:
                return dielectric(j.at("chi0").get<double>(),
                                  j.at("a").get<double>(), disp);
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("potential: ") + e.what());
    }
    throw FormatError("potential: unreachable kind");
}

nlohmann::json PotentialModel::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    switch (kind_) {
        case PotentialKind::delta:
            j["g"] = height_;
            break;
        case PotentialKind::dielectric:
            j["chi0"] = height_;
            j["a"] = width_;
            break;
        case PotentialKind::user_grid:
            j["grid"] = {{"x", grid_x_}, {"v", grid_v_}};
            break;
        default:
            j["V0"] = height_;
            j["a"] = width_;
    }
    if (dispersive())
        j["dispersion"] = {{"kind", "lorentzian_cutoff"},
                           {"k_c", dispersion_.k_c},
                           {"p", dispersion_.p}};
    return j;
}

}  // namespace scatter_trace
