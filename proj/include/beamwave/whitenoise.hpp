#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "beamwave/covariance.hpp"
#include "beamwave/parabolic.hpp"
#include "beamwave/rng.hpp"

namespace beamwave {

/// Calibration of the Brownian screens: Cov[dB(x), dB(y)] = kWhiteNoiseScale * Gamma(x, y) dz.
/// With this value E[exp(i k dB)] = exp(-k^2 Gamma0 dz), the stated mean-field drift.
inline constexpr double kWhiteNoiseScale = 2.0;

enum class WnVariant { Standard, OriginPinned };

struct WnConfig {
  double k_tilde = 1.0;
  std::shared_ptr<const CovarianceKernel> kernel;
  double dz = 0.01;
  double z_final = 1.0;
  WnVariant variant = WnVariant::Standard;
  /// Strictly increasing, inside (0, z_final]. Empty means {z_final}.
  std::vector<double> checkpoints;

  void validate() const;
  const GridSpec& grid() const { return kernel->grid(); }
  std::vector<double> checkpoint_list() const;
};

/// Draws Brownian screen increments on the grid.
/// Standard: spectral synthesis with the kernel's torus weights.
/// OriginPinned: dense factor of the pinned covariance with the origin row
/// removed, so the origin value is exactly zero.
class IncrementSampler {
 public:
  IncrementSampler(std::shared_ptr<const CovarianceKernel> kernel, WnVariant variant);
  /// Fills out with one increment of variance scale dz.
  void draw(StreamRng& rng, double dz, std::span<double> out);
  /// Var[dB(x)] / dz at each grid point.
  std::vector<double> variance_per_dz() const;
  /// sum_{x,y} u(x) u(y) Gamma(x, y) for complex u (non-conjugated).
  Complex quadratic_form(std::span<const Complex> u);
  /// sum_{x,y} u(x) conj(u(y)) Gamma(x, y).
  double hermitian_form(std::span<const Complex> u);
  WnVariant variant() const { return variant_; }

 private:
  std::shared_ptr<const CovarianceKernel> kernel_;
  WnVariant variant_;
  std::unique_ptr<Fft> fft_;
  std::vector<double> amplitude_;
  std::vector<Complex> buffer_;
  /// Second real field from the last spectral draw, consumed by the next call.
  std::vector<double> spare_;
  double spare_dz_ = 0.0;
  bool has_spare_ = false;
  Eigen::MatrixXd factor_;
  std::vector<std::size_t> free_index_;
};

/// One increment with fresh sampler state.
std::vector<double> wn_increment(std::shared_ptr<const CovarianceKernel> kernel, WnVariant variant, double dz,
                                 StreamRng& rng);

/// Per-path martingale data for the quadratic-variation probe.
/// Predictions use the leading-order (K-form) conditional moments, whose
/// relative bias per step is of order k^2 Gamma0 dz.
struct QvPath {
  /// Sum over steps of the exact martingale increments.
  Complex martingale = 0.0;
  /// -2 k^2 * sum over steps of <theta, K_Psi theta> dz (non-conjugated).
  Complex predicted = 0.0;
  /// 2 k^2 * sum over steps of sum_{x,y} u(x) conj(u(y)) Gamma(x, y) dz.
  double predicted_abs = 0.0;
};

struct WnTrajectory {
  Trajectory trajectory;
  /// Filled when a QV test function is supplied; one entry per checkpoint.
  std::vector<QvPath> qv;
};

struct WnOptions {
  bool keep_fields = false;
  double norm_tolerance = 1e-6;
  /// Test function tracked by the quadratic-variation probe.
  const TestFunction* qv_theta = nullptr;
  /// 0: compensated observable <Psi_z, theta> minus its predictable drift.
  /// h > 0 (Standard only): exp(k^2 Gamma0 z) <Psi_z, F(h - z) theta> up to z = h,
  /// whose terminal value is exp(k^2 Gamma0 h) <Psi_h, theta>.
  double qv_horizon = 0.0;
};

/// Strang scheme free(dz/2), exp(i k dB), free(dz/2) with merged half steps.
WnTrajectory wn_propagate(const WnConfig& config, const WaveField& F0, std::span<const TestFunction> thetas,
                          std::uint64_t seed, std::uint64_t realization, WnOptions options = {});

struct QvReport {
  std::size_t realizations = 0;
  Complex empirical = 0.0;
  Complex predicted = 0.0;
  Complex ratio = 0.0;
  double empirical_abs = 0.0;
  double predicted_abs = 0.0;
  /// Jackknife standard errors of the real and imaginary parts of the ratio.
  double se_re = 0.0;
  double se_im = 0.0;
};

/// Compares mean M_z^2 with mean predicted quadratic variation.
QvReport quadratic_variation_probe(std::span<const QvPath> paths, std::size_t min_realizations = 1000);

}  // namespace beamwave
