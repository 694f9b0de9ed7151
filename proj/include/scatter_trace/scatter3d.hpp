#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "scatter_trace/potentials.hpp"

namespace scatter_trace {

struct Channel {
    int label = 0;       // partial wave l, or a tracked channel index
    int degeneracy = 1;  // 2l+1 for partial waves
    double eta = 0.0;    // phase shift, radians, continuous branch
};

// Phase-shift spectrum of S-hat(k). l_max >= 0 marks partial-wave origin
// (channel label = l, degeneracy 2l+1); l_max < 0 marks ingested channels.
struct PhaseShiftSpectrum {
    double k = 0.0;
    std::vector<Channel> channels;
    int l_max = -1;
};

// Truncated S-hat(k) on the (l,m) lexicographic spherical-harmonic basis,
// dimension (l_max+1)^2. S = 1 + 2ik f-hat.
struct SOperator {
    double k = 0.0;
    int l_max = 0;
    Eigen::MatrixXcd matrix;

    int dim() const { return (l_max + 1) * (l_max + 1); }
    double unitarity_defect() const;
};

struct CrossSection {
    double k = 0.0;
    double sigma_bar = 0.0;  // (4 pi / k^2) sum (2l+1) sin^2 eta_l
    std::vector<double> per_channel;
};

// Radial partial-wave solve: eta_l for l = 0..l_max via Riccati-Bessel
// matching at the support edge. l_max < 0 picks ceil(k * support) + 8.
PhaseShiftSpectrum phase_shifts(const PotentialModel& model, double k,
                                int l_max = -1, double tol = 1e-8);

// Grid version with per-channel continuous branches (unwrapped in k).
std::vector<PhaseShiftSpectrum> phase_shifts_grid(const PotentialModel& model,
                                                  std::span<const double> kgrid,
                                                  int l_max = -1,
                                                  double tol = 1e-8);

// f(k, theta) = (1/2ik) sum (2l+1) (e^{2i eta_l} - 1) P_l(cos theta).
std::complex<double> amplitude(const PhaseShiftSpectrum& spectrum,
                               double cos_theta);

CrossSection cross_section(const PhaseShiftSpectrum& spectrum);

// tr (S-1)^dag (S-1) = 4 sum d_a sin^2 eta_a = (1/pi) k^2 sigma_bar.
double hs_norm_squared(const PhaseShiftSpectrum& spectrum);
double hs_norm_squared(const SOperator& op);

// log det_1 S = sum d_a [2i eta_a - (e^{2i eta_a} - 1)]; the dense path
// recovers eigenphases (principal branch) from the matrix spectrum.
std::complex<double> log_det1(const PhaseShiftSpectrum& spectrum);
std::complex<double> log_det1(const SOperator& op);

// tr f-hat = sum d_a (e^{2i eta_a} - 1) / (2ik) = tr(S - 1)/(2ik).
std::complex<double> trace_f(const PhaseShiftSpectrum& spectrum);

// The |log det_1| < (1/2pi) k^2 sigma_bar bound holds only at weak coupling
// (eta_0 = pi/2 already violates it); reported, never enforced.
struct Det1BoundReport {
    double lhs = 0.0;  // |log det_1 S|
    double rhs = 0.0;  // (1/2pi) k^2 sigma_bar
    bool violated = false;
    double max_abs_eta = 0.0;
};
Det1BoundReport det1_bound_report(const PhaseShiftSpectrum& spectrum);

// Builds the diagonal (l,m)-basis operator from partial-wave phases.
SOperator soperator_from_phases(const PhaseShiftSpectrum& spectrum);

// S-operator file: {"l_max", "k_count", "unitarity_tol",
// "basis": "(l,m) lexicographic", "records": [...]} with either dense
// row-major [re, im] matrices or the compact {"k", "phase_shifts": [...]}
// variant for spherically symmetric data.
struct SOperatorFile {
    int l_max = 0;
    double unitarity_tol = 1e-6;
    bool compact = false;
    std::vector<SOperator> operators;            // dense variant
    std::vector<PhaseShiftSpectrum> spectra;     // both variants (tracked)
};

void save_soperator(const std::string& path,
                    std::span<const SOperator> operators,
                    double unitarity_tol = 1e-6);
void save_soperator_compact(const std::string& path,
                            std::span<const PhaseShiftSpectrum> spectra,
                            double unitarity_tol = 1e-6);
SOperatorFile load_soperator(const std::string& path);

// Eigen-decomposes each operator and assigns channels continuously in k by
// maximal eigenvector overlap, then unwraps each channel's phase.
std::vector<PhaseShiftSpectrum> track_eigenphases(
    std::span<const SOperator> operators, double unitarity_tol = 1e-6);

}  // namespace scatter_trace
