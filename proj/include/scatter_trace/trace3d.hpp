#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scatter_trace/scatter3d.hpp"
#include "scatter_trace/trace1d.hpp"

namespace scatter_trace {

// Tabulated inputs of the 3D dispersion relation and Casimir formula.
// All curves share kgrid; log_det1_arg must be branch-continuous.
struct DispersionInputs {
    std::vector<double> kgrid;
    std::vector<double> sigma_bar;      // average total cross-section
    std::vector<double> log_det1_arg;   // arg det_1 S(k)
    std::vector<double> born_integral;  // Int V(x,k) d^3x
    std::vector<double> hs_bound;       // (1/2pi) k^2 sigma_bar, derived
    // direct arg det S = 2 sum (2l+1) eta_l when built from partial waves
    std::vector<double> direct_arg_det;
    double max_abs_eta = 0.0;

    void validate() const;
};

// Solves the partial-wave problem on the grid and fills every input curve.
DispersionInputs build_dispersion_inputs(const PotentialModel& model,
                                         std::span<const double> kgrid,
                                         int l_max = -1, double tol = 1e-8);

// Same from tracked ingested spectra plus a user-supplied Born integral
// table (the potential integral is not recoverable from scattering data).
DispersionInputs dispersion_inputs_from_spectra(
    std::span<const PhaseShiftSpectrum> spectra,
    std::span<const double> born_integral);

// Re tr f-hat(k) = -(1/4pi) Int V d^3x
//                  + (1/4pi^2) P Int 2 k'^2 sigma(k')/(k'^2-k^2) dk'.
double re_tr_f(const DispersionInputs& inputs, double k);

// arg det S(k) = arg det_1 S(k) + 2k Re tr f-hat(k).
double arg_det_S(const DispersionInputs& inputs, double k);

// Three-term Casimir energy:
//   tr-bar sqrt(H) = Int (dk/4pi^2) k Int V d^3x
//                    - Int Int (dk/2pi)(dk'/2pi)(k k'/pi)
//                      [k' sigma(k') - k sigma(k)]/(k'^2 - k^2)
//                    - Int (dk/2pi) arg det_1 S(k).
// breakdown: anomaly_term, cross_section_term, det1_term; the det_1 bound
// report is attached (flag, never enforced).
struct Casimir3dResult {
    TraceResult trace;
    double det1_bound = 0.0;  // Int (dk/2pi) (1/2pi) k^2 sigma
    bool bound_violated = false;
    bool weak_coupling = false;

    nlohmann::json to_json() const;
};

Casimir3dResult casimir_energy_3d(const DispersionInputs& inputs);

}  // namespace scatter_trace
