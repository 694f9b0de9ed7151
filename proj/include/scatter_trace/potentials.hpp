#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scatter_trace/numerics.hpp"

namespace scatter_trace {

enum class PotentialKind {
    delta,
    square_barrier,
    gaussian,
    sech2,
    user_grid,
    dielectric
};

enum class DispersionKind { none, lorentzian_cutoff };

// Wavenumber cutoff multiplier m(k) = (1 + k^2/k_c^2)^(-p). p >= 2 makes
// k^2 V -> 0 for plain potentials; p >= 3 is required for dielectric models
// where V itself carries a factor k^2. p = 1 is allowed for 1D couplings
// whose trace integrals converge with any decay; the evaluators that need
// stronger decay check it at the point of use.
struct DispersionProfile {
    DispersionKind kind = DispersionKind::none;
    double k_c = 1.0;
    int p = 2;

    double multiplier(double k) const {
        if (kind == DispersionKind::none) return 1.0;
        double r = 1.0 + k * k / (k_c * k_c);
        double m = 1.0;
        for (int i = 0; i < p; ++i) m /= r;
        return m;
    }

    static DispersionProfile none() { return {}; }
    static DispersionProfile lorentzian(double k_c, int p);
};

// Family of repulsive potentials V(x,k) >= 0, vanishing at infinity.
// In 3D tasks the coordinate is the radius r >= 0.
class PotentialModel {
public:
    static PotentialModel delta(double g);
    static PotentialModel square_barrier(double height, double width);
    static PotentialModel gaussian(double height, double width);
    static PotentialModel sech2(double height, double width);
    static PotentialModel user_grid(std::vector<double> x,
                                    std::vector<double> v);
    // V(x,k) = k^2 chi(x) m(k) with chi(x) = chi0 exp(-x^2/a^2); the
    // dispersion profile is mandatory (p >= 3) or V would grow with k.
    static PotentialModel dielectric(double chi0, double width,
                                     DispersionProfile dispersion);

    PotentialModel with_dispersion(DispersionProfile dispersion) const;
    // Same potential reflected through the origin, x -> -x.
    PotentialModel mirrored() const;

    PotentialKind kind() const { return kind_; }
    bool dispersive() const { return dispersion_.kind != DispersionKind::none; }
    const DispersionProfile& dispersion() const { return dispersion_; }

    // V(x, k). The delta kind cannot be sampled pointwise.
    double evaluate(double x, double k) const;
    // Smallest X with V(x, 1) < tol for |x| > X.
    double support_radius(double tol) const;

    // Delta strength g(k) = g * m(k); delta kind only.
    double delta_strength(double k) const;
    // k-dependent coupling c(k) with V(x,k) = c(k) * shape(x).
    double coupling(double k) const;
    double shape(double x) const;

    // Integral of V(.,k) over the line (1D Born phase) or over all of
    // 3-space for a radial model.
    double integral_1d(double k) const;
    double born_integral_3d(double k) const;

    double param_height() const { return height_; }
    double param_width() const { return width_; }

    static PotentialModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    PotentialModel() = default;
    void validate() const;

    PotentialKind kind_ = PotentialKind::gaussian;
    double height_ = 0.0;  // g for delta, V0 for barriers, chi0 for dielectric
    double width_ = 1.0;
    bool mirrored_ = false;
    DispersionProfile dispersion_;
    std::vector<double> grid_x_, grid_v_;
    std::optional<MonotoneCubic> grid_interp_;
};

std::string to_string(PotentialKind k);

}  // namespace scatter_trace
