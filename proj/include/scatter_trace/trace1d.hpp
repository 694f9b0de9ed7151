#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scatter_trace/pvmath.hpp"
#include "scatter_trace/scatter1d.hpp"

namespace scatter_trace {

enum class WeightKind { casimir, exp_cutoff_casimir, gaussian_bump, user_grid };

// Spectral weight phi(k) on [0, inf). The Casimir weight phi = k needs a
// dispersive potential downstream; the cutoff variant is k e^{-k/Lambda}.
class WeightFunction {
public:
    static WeightFunction casimir();
    static WeightFunction exp_cutoff_casimir(double lambda);
    static WeightFunction gaussian_bump(double center, double width,
                                        double height = 1.0);
    static WeightFunction user_grid(std::vector<double> k,
                                    std::vector<double> phi);

    double value(double k) const;
    double derivative(double k) const;
    WeightKind kind() const { return kind_; }
    // k beyond which |phi'| is negligible; infinity for the plain Casimir
    // weight.
    double support_limit() const;

    static WeightFunction from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    WeightFunction() = default;
    WeightKind kind_ = WeightKind::casimir;
    double center_ = 0.0, width_ = 1.0, height_ = 1.0, lambda_ = 1.0;
    std::vector<double> grid_k_, grid_phi_;
    MonotoneCubic interp_;
};

struct GridDescriptor {
    double k_min = 0.0, k_max = 0.0;
    std::size_t count = 0;
};

struct TraceResult {
    double value = 0.0;
    std::map<std::string, double> breakdown;
    double quadrature_error = 0.0;
    GridDescriptor kgrid_used;

    nlohmann::json to_json() const;
};

// tr-bar phi(sqrt H) = -Int_0^inf (dk/2pi) phi'(k) arg det S(k).
TraceResult trace_direct(std::span<const ScatterData1D> data,
                         const WeightFunction& phi);

// Same trace through the reflection-only dispersion route: arg det S is
// replaced by (1/pi) P Int_0^inf log(1-|R(k')|^2) 2k/(k^2-k'^2) dk'.
TraceResult trace_reflection(std::span<const ScatterData1D> data,
                             const WeightFunction& phi);

// tr-bar sqrt(H) as the symmetric non-singular double integral
//   -(1/2 pi^2) Int Int [k f(k') - k' f(k)] / (k^2 - k'^2) dk dk',
// f = log(1-|R|^2), with the diagonal filled by the derivative limit.
TraceResult casimir_energy_1d(std::span<const ScatterData1D> data);

// log(1-|R|^2) tabulated from scattering data, extended to small k' with the
// fitted 2 log k' + c head and given a fitted power-law tail.
SampledFunction reflection_log_sample(std::span<const ScatterData1D> data);

// Density of states rho(k) = (1/2pi) d(arg det S)/dk by central differences.
std::vector<std::pair<double, double>> density_of_states(
    std::span<const ScatterData1D> data);

}  // namespace scatter_trace
