#pragma once

#include <span>
#include <vector>

#include "scatter_trace/potentials.hpp"
#include "scatter_trace/trace1d.hpp"

namespace scatter_trace {

enum class BoxMethod { matrix_fd, shooting };

// Dirichlet eigen-wavenumbers of -u'' + V u = k^2 u in a box.
struct BoxSpectrum {
    double L = 0.0;  // half-width (1D) or sphere radius (radial)
    std::vector<double> eigen_k;
    BoxMethod method = BoxMethod::matrix_fd;
    double resolution_error = 0.0;  // discretization estimate on the levels
};

// Lowest n_max levels on [-L, L] with u(+-L) = 0. The delta kind is solved
// from its exact matching conditions (odd sector free, even sector
// tan(kL) = -2k/g(k)); other kinds by finite differences with Richardson
// refinement, or by Numerov shooting.
BoxSpectrum box_spectrum(const PotentialModel& model, double L, int n_max,
                         BoxMethod method = BoxMethod::matrix_fd,
                         double tol = 1e-7);

// Free 1D levels pi n / (2L), n = 1..n_max.
std::vector<double> free_box_levels(double L, int n_max);

struct ModeSumResult {
    double value = 0.0;  // L -> infinity extrapolation of the mode sum
    double error = 0.0;
    std::vector<std::pair<double, double>> per_length;  // (L, sum at L)
};

// Sum_n [phi(k_n(L)) - phi(pi n / 2L)] extrapolated over the given boxes
// with the c0 + c1/L model.
ModeSumResult mode_sum(const PotentialModel& model, const WeightFunction& phi,
                       std::span<const double> Ls, int n_max,
                       double tol = 1e-7);

// Radial channel: -u'' + [V(r) + l(l+1)/r^2] u = k^2 u, u(0) = u(R_box) = 0.
BoxSpectrum radial_box_spectrum(const PotentialModel& model, int l,
                                double R_box, int n_max,
                                BoxMethod method = BoxMethod::matrix_fd,
                                double tol = 1e-7);

// Degeneracy-weighted radial mode sum over channels l <= l_max, each channel
// referenced against the free levels of the same solver, extrapolated in
// R_box. Levels are paired by index up to the first free level above k_cut.
ModeSumResult radial_mode_sum(const PotentialModel& model,
                              const WeightFunction& phi, int l_max,
                              std::span<const double> R_boxes, double k_cut,
                              double tol = 1e-7);

}  // namespace scatter_trace
