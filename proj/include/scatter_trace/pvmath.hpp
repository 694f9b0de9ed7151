#pragma once

#include <complex>
#include <span>
#include <vector>

#include "scatter_trace/numerics.hpp"

namespace scatter_trace {

enum class TailKind { zero, power_law };

// f(k) ~ coefficient * |k|^exponent beyond the sampled range. The PV kernels
// supply an extra 1/k'^2 of decay, so exponents up to (not including) 1 are
// integrable there; plain tail integrals additionally require exponent < -1.
struct TailModel {
    TailKind kind = TailKind::zero;
    double exponent = 0.0;
    double coefficient = 0.0;

    static TailModel zero() { return {}; }
    static TailModel power_law(double exponent, double coefficient);
};

// A real function tabulated on an ascending grid, interpolated by a natural
// cubic spline, with an optional power-law tail beyond both ends.
class SampledFunction {
public:
    SampledFunction(std::vector<double> abscissae, std::vector<double> values,
                    TailModel tail = {});

    double operator()(double k) const { return spline_(k); }
    const CubicSpline& spline() const { return spline_; }
    const TailModel& tail() const { return tail_; }
    double front() const { return spline_.front(); }
    double back() const { return spline_.back(); }

    // Fits a power-law tail model to the last n_fit samples.
    static TailModel fit_tail(std::span<const double> x,
                              std::span<const double> y, int n_fit = 12);

private:
    CubicSpline spline_;
    TailModel tail_;
};

// (1/pi) P Int f(k')/(k - k') dk' over the sampled range plus tails.
// With f = log(1-|R|^2) this is arg det S(k) of the 1D dispersion relation.
double pv_hilbert(const SampledFunction& f, double k);

// P Int_0^inf f(k') 2k/(k^2 - k'^2) dk' for f sampled on k' >= 0.
// Equals the even-extension full-line integral P Int f(k')/(k-k') dk',
// i.e. pi * pv_hilbert of the even extension.
double pv_symmetric(const SampledFunction& f, double k);

// Gamma(z) as the reciprocal of the renormalized product
//   1/Gamma(z) = z e^{gamma z} Prod_n e^{-z/n} (1 + z/n),
// truncated at N with the n > N factors summed analytically
// (log(e^{-z/n}(1+z/n)) expanded in 1/n against Hurwitz zeta values).
std::complex<double> gamma_regularized(std::complex<double> z, int N,
                                       double gamma_const);

// Euler's constant from H_N - ln N with Euler-Maclaurin acceleration.
double euler_constant(int N);

}  // namespace scatter_trace
