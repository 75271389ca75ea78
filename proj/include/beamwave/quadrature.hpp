#pragma once

#include <functional>
#include <span>

namespace beamwave::quad {

using Integrand = std::function<double(double)>;

struct Options {
  double rel = 1e-10;
  double abs = 1e-14;
  int max_depth = 20;
  /// Use tanh-sinh on the segment touching 0 (integrable endpoint singularity).
  bool singular_at_zero = false;
};

/// Adaptive Gauss-Kronrod (31-point) on a finite interval.
double gk(const Integrand& f, double a, double b, const Options& opt = {}, double* err = nullptr);

/// Finite interval split at the given characteristic scales (each scale s
/// contributes breakpoints s/4, s, 4s) and geometric refinement in between.
double segmented(const Integrand& f, double a, double b, std::span<const double> scales,
                 const Options& opt = {});

/// Integral over [a, inf) of a decaying, non-oscillatory integrand.
double to_infinity(const Integrand& f, double a, std::span<const double> scales,
                   const Options& opt = {});

enum class Kernel { J0, Sinc };

/// k-th positive zero (k >= 1) of the kernel function.
double kernel_zero(Kernel kernel, int k);
double kernel_value(Kernel kernel, double x);

/// 1 - J0(x) without cancellation at small x.
double one_minus_j0(double x);

/// Integral over [a, inf) of f(k) * kernel(k r). The interval is split at
/// kernel zeros; once past the largest scale the alternating lobe sums are
/// Euler-averaged to extrapolate the tail.
double oscillatory(const Integrand& f, Kernel kernel, double r, double a,
                   std::span<const double> scales, const Options& opt = {});

}  // namespace beamwave::quad
