#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "scatter_trace/potentials.hpp"

namespace scatter_trace {

// Plane-wave coefficients of u at infinity:
//   u -> A e^{ikx} + B e^{-ikx}  (x -> -inf)
//   u -> C e^{ikx} + D e^{-ikx}  (x -> +inf)
struct AsymptoticAmplitudes {
    std::complex<double> A, B, C, D;
    // |A|^2 + |D|^2 - |C|^2 - |B|^2, zero for an exact solution.
    double flux_defect() const;
};

// Scattering data at one wavenumber. arg_T carries the branch chosen
// continuous in k with arg T -> 0 as k -> infinity; for a single solve it is
// the principal value.
struct ScatterData1D {
    double k = 0.0;
    std::complex<double> R, T;
    double arg_T = 0.0;
    double eta1 = 0.0, eta2 = 0.0;  // S-matrix eigenphases, eta1+eta2 = arg T
    Eigen::Matrix2cd S;

    double arg_det_s() const { return 2.0 * arg_T; }
    // max-norm of S^dag S - 1; equals | |R|^2 + |T|^2 - 1 |.
    double unitarity_defect() const;
    // the left-incidence solution: A = 1, B = R, C = T, D = 0
    AsymptoticAmplitudes amplitudes() const { return {1.0, R, T, 0.0}; }

    // S(k) = [[T, -R* T/T*], [R, T]].
    static Eigen::Matrix2cd s_matrix(std::complex<double> R,
                                     std::complex<double> T);
};

// Solves -u'' + V(x,k) u = k^2 u for the left-incidence scattering data.
// The delta kind uses the closed form T = (1 + i g/2k)^{-1}, R = T - 1.
ScatterData1D solve(const PotentialModel& model, double k, double tol = 1e-10);

// Per-k solve with a globally continuous phase branch (unwrapped, anchored
// to the Born tail arg T ~ -Int V / 2k at the top of the grid).
std::vector<ScatterData1D> solve_grid(const PotentialModel& model,
                                      std::span<const double> kgrid,
                                      double tol = 1e-10);

// Below this wavenumber results are extrapolated (R -> -1, T ~ alpha k).
constexpr double kLowKCutoff = 1e-3;

// CSV columns: k, Re R, Im R, Re T, Im T, arg det S, |R|^2.
void save_scatter1d_csv(const std::string& path,
                        std::span<const ScatterData1D> data);
std::vector<ScatterData1D> load_scatter1d_csv(const std::string& path,
                                              double unitarity_tol = 1e-6);

}  // namespace scatter_trace
