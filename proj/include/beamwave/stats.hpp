#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "beamwave/parabolic.hpp"

namespace beamwave {

/// Fixed-point accumulator with exact, order-independent addition.
/// Values are rounded to multiples of 2^-60.
class ExactSum {
 public:
  void add(double v);
  void merge(const ExactSum& other) { sum_ += other.sum_; }
  double value() const;
  bool operator==(const ExactSum& other) const { return sum_ == other.sum_; }

 private:
  __int128 sum_ = 0;
};

/// Observables of one realization at every checkpoint.
struct RealizationRecord {
  std::vector<CheckpointRecord> checkpoints;
  /// On-axis intensity |Psi(0)|^2 per checkpoint.
  std::vector<double> axis_intensity;
};

/// Ensemble accumulators over checkpoints and test functions. merge is exact,
/// associative and commutative; per-realization samples are kept by index
/// for distribution distances.
class EnsembleStats {
 public:
  EnsembleStats() = default;
  EnsembleStats(std::size_t checkpoints, std::size_t thetas, std::size_t grid_points = 0);

  /// grid_fields, when non-empty, holds the checkpoint fields for the mean-field accumulator.
  void add(std::uint64_t realization, const RealizationRecord& record, std::span<const WaveField> grid_fields = {});
  void merge(const EnsembleStats& other);

  std::size_t count() const { return count_; }
  std::size_t checkpoints() const { return cps_; }
  std::size_t thetas() const { return thetas_; }
  std::vector<double> z_values() const { return z_; }

  Complex mean(std::size_t cp, std::size_t theta) const;
  /// Unbiased sample variances of the real and imaginary parts.
  double var_re(std::size_t cp, std::size_t theta) const;
  double var_im(std::size_t cp, std::size_t theta) const;
  double mean_width(std::size_t cp) const;
  double mean_norm(std::size_t cp) const;
  std::array<double, 2> mean_centroid(std::size_t cp) const;
  double var_centroid(std::size_t cp, int axis) const;
  /// E[I^2] / E[I]^2 - 1 for the on-axis intensity.
  double scintillation(std::size_t cp) const;
  bool has_mean_field() const { return grid_points_ > 0; }
  std::vector<Complex> mean_field(std::size_t cp) const;

  /// Samples of re or im <Psi, theta> in realization order.
  std::vector<double> samples(std::size_t cp, std::size_t theta, bool imaginary) const;
  const std::map<std::uint64_t, RealizationRecord>& records() const { return records_; }

  bool operator==(const EnsembleStats& other) const;

 private:
  std::size_t slot(std::size_t cp, std::size_t theta) const { return cp * thetas_ + theta; }

  std::size_t cps_ = 0;
  std::size_t thetas_ = 0;
  std::size_t grid_points_ = 0;
  std::size_t count_ = 0;
  std::vector<double> z_;
  // Per (checkpoint, theta): re, im, re^2, im^2.
  std::vector<std::array<ExactSum, 4>> obs_;
  // Per checkpoint: width, norm, I, I^2, cx, cy, cx^2, cy^2.
  std::vector<std::array<ExactSum, 8>> beam_;
  // Per checkpoint and grid point: re, im.
  std::vector<std::array<ExactSum, 2>> field_;
  std::map<std::uint64_t, RealizationRecord> records_;
};

/// Two-sample energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| (V-statistic, >= 0).
double energy_distance(std::span<const double> x, std::span<const double> y);
/// Unbiased estimate of E|X - X'| over distinct pairs.
double mean_abs_difference(std::span<const double> x);

double mean_of(std::span<const double> x);
double variance_of(std::span<const double> x);

}  // namespace beamwave
