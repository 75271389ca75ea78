#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace beamwave {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SpectrumVariant { VonKarman, Hill, BoundedPowerLaw };

std::string to_string(SpectrumVariant v);
SpectrumVariant variant_from_string(const std::string& name);

/// Turbulence spectral model in rescaled (nondimensional) units.
///
/// BoundedPowerLaw: K (eta^2 + k^2)^(-H-3/2) (1 + k^2/rho^2)^(-2).
/// VonKarman:       A (k^2 + eta^2)^(-11/6) exp(-k^2 / (5.92 rho)^2).
/// Hill:            VonKarman with the high-wavenumber bump factor and a
///                  3.3 rho cutoff.
/// For the physical variants eta plays the role of K0 = 2 pi / L0 and the
/// inner scale is 1/rho, so the cutoffs are fixed multiples of rho.
struct SpectrumParams {
  SpectrumVariant variant = SpectrumVariant::BoundedPowerLaw;
  double H = 1.0 / 3.0;
  double eta = 1.0;
  double rho = kInf;
  double amplitude = 1.0;

  static SpectrumParams bounded_power_law(double K, double H, double eta, double rho = kInf);
  static SpectrumParams von_karman(double amplitude, double eta, double rho = kInf);
  static SpectrumParams hill(double amplitude, double eta, double rho = kInf);

  /// Throws ConfigError when an invariant fails.
  void validate() const;
  bool rho_finite() const { return std::isfinite(rho); }
  /// Gaussian cutoff wavenumber of the physical variants (inf when rho = inf).
  double cutoff() const;
  /// Wavenumbers at which the density changes character; quadrature breakpoints.
  std::vector<double> scales() const;
  /// 64-bit FNV-1a hash of the canonical parameter text.
  std::uint64_t hash() const;
};

struct SpectrumSample {
  double value = 0.0;
  /// Hill bracket went negative and was clamped to zero.
  bool clamped = false;
};

/// Density as a function of |kappa|, with the clamp flag.
SpectrumSample eval_radial_checked(const SpectrumParams& params, double k);
/// Density as a function of |kappa|.
double eval_radial(const SpectrumParams& params, double k);

double eval_spectrum(const SpectrumParams& params, const std::array<double, 3>& kappa);

/// The xi = 0 slice Phi(0, p).
double eval_transverse(const SpectrumParams& params, const std::array<double, 2>& p);

/// Integral of |p|^4 Phi over R^3. Needs rho finite.
double laplacian_moment(const SpectrumParams& params);

/// Integral of Phi over R^3 (the point variance). Needs eta > 0.
double total_variance(const SpectrumParams& params);

/// R(t) = integral of exp(i t xi) Phi(xi, p) over R^3.
double longitudinal_corr(const SpectrumParams& params, double t);

/// Integral of R(t)/R(0) over [0, T]; T may be infinite.
double correlation_integral(const SpectrumParams& params, double T);

/// Marginal of Phi over one transverse wavenumber, as a function of the
/// remaining 2D radius s: Phi2(s) = integral of Phi(sqrt(s^2 + q^2)) dq.
/// This is the spectrum of a planar (z, x1) section of the 3D medium and is
/// tabulated once for fast lookup.
class PlanarMarginal {
 public:
  PlanarMarginal(const SpectrumParams& params, double s_min, double s_max);

  double operator()(double s) const;
  /// Direct quadrature, bypassing the table.
  static double direct(const SpectrumParams& params, double s);

 private:
  SpectrumParams params_;
  double at_zero_ = 0.0;
  double log_min_ = 0.0;
  double log_step_ = 0.0;
  std::vector<double> log_values_;
};

}  // namespace beamwave
