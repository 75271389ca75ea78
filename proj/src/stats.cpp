#include "beamwave/stats.hpp"

#include <algorithm>
#include <cmath>

#include "beamwave/error.hpp"

namespace beamwave {

namespace {

constexpr int kFracBits = 60;

// Sum over pairs i < j of |x_i - x_j| for sorted input.
double pair_sum_sorted(std::span<const double> sorted) {
  const auto n = static_cast<double>(sorted.size());
  double s = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) s += sorted[i] * (2.0 * static_cast<double>(i) - n + 1.0);
  return s;
}

double pair_sum(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return pair_sum_sorted(v);
}

}  // namespace

void ExactSum::add(double v) {
  if (!std::isfinite(v) || std::abs(v) > 1e18) throw InvariantViolation("statistic out of fixed-point range");
  sum_ += static_cast<__int128>(std::nearbyint(std::ldexp(v, kFracBits)));
}

double ExactSum::value() const { return std::ldexp(static_cast<double>(sum_), -kFracBits); }

EnsembleStats::EnsembleStats(std::size_t checkpoints, std::size_t thetas, std::size_t grid_points)
    : cps_(checkpoints),
      thetas_(thetas),
      grid_points_(grid_points),
      obs_(checkpoints * thetas),
      beam_(checkpoints),
      field_(checkpoints * grid_points) {}

void EnsembleStats::add(std::uint64_t realization, const RealizationRecord& record,
                        std::span<const WaveField> grid_fields) {
  if (record.checkpoints.size() != cps_) throw ConfigError("realization has the wrong number of checkpoints");
  if (records_.count(realization)) throw ConfigError("realization " + std::to_string(realization) + " added twice");
  if (z_.empty()) {
    for (const auto& c : record.checkpoints) z_.push_back(c.z);
  }
  for (std::size_t cp = 0; cp < cps_; ++cp) {
    const auto& c = record.checkpoints[cp];
    if (c.obs.size() != thetas_) throw ConfigError("realization has the wrong number of test functions");
    for (std::size_t t = 0; t < thetas_; ++t) {
      auto& a = obs_[slot(cp, t)];
      const double re = c.obs[t].real(), im = c.obs[t].imag();
      a[0].add(re);
      a[1].add(im);
      a[2].add(re * re);
      a[3].add(im * im);
    }
    auto& b = beam_[cp];
    const double I = record.axis_intensity.at(cp);
    b[0].add(c.width);
    b[1].add(c.norm);
    b[2].add(I);
    b[3].add(I * I);
    b[4].add(c.centroid[0]);
    b[5].add(c.centroid[1]);
    b[6].add(c.centroid[0] * c.centroid[0]);
    b[7].add(c.centroid[1] * c.centroid[1]);
  }
  if (grid_points_ > 0) {
    if (grid_fields.size() != cps_) throw ConfigError("mean-field accumulation needs every checkpoint field");
    for (std::size_t cp = 0; cp < cps_; ++cp) {
      const auto& v = grid_fields[cp].values;
      if (v.size() != grid_points_) throw ConfigError("checkpoint field has the wrong size");
      for (std::size_t i = 0; i < grid_points_; ++i) {
        field_[cp * grid_points_ + i][0].add(v[i].real());
        field_[cp * grid_points_ + i][1].add(v[i].imag());
      }
    }
  }
  records_.emplace(realization, record);
  ++count_;
}

void EnsembleStats::merge(const EnsembleStats& other) {
  if (other.count_ == 0) return;
  if (count_ == 0 && records_.empty() && cps_ == 0) {
    *this = other;
    return;
  }
  if (other.cps_ != cps_ || other.thetas_ != thetas_ || other.grid_points_ != grid_points_) {
    throw ConfigError("cannot merge statistics with different layouts");
  }
  for (const auto& [idx, rec] : other.records_) {
    if (records_.count(idx)) throw ConfigError("realization " + std::to_string(idx) + " present in both ensembles");
  }
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    for (int k = 0; k < 4; ++k) obs_[i][k].merge(other.obs_[i][k]);
  }
  for (std::size_t i = 0; i < beam_.size(); ++i) {
    for (int k = 0; k < 8; ++k) beam_[i][k].merge(other.beam_[i][k]);
  }
  for (std::size_t i = 0; i < field_.size(); ++i) {
    field_[i][0].merge(other.field_[i][0]);
    field_[i][1].merge(other.field_[i][1]);
  }
  if (z_.empty()) z_ = other.z_;
  records_.insert(other.records_.begin(), other.records_.end());
  count_ += other.count_;
}

Complex EnsembleStats::mean(std::size_t cp, std::size_t theta) const {
  const auto& a = obs_.at(slot(cp, theta));
  const auto n = static_cast<double>(count_);
  return {a[0].value() / n, a[1].value() / n};
}

double EnsembleStats::var_re(std::size_t cp, std::size_t theta) const {
  const auto& a = obs_.at(slot(cp, theta));
  const auto n = static_cast<double>(count_);
  if (count_ < 2) return 0.0;
  return std::max(0.0, (a[2].value() - a[0].value() * a[0].value() / n) / (n - 1.0));
}

double EnsembleStats::var_im(std::size_t cp, std::size_t theta) const {
  const auto& a = obs_.at(slot(cp, theta));
  const auto n = static_cast<double>(count_);
  if (count_ < 2) return 0.0;
  return std::max(0.0, (a[3].value() - a[1].value() * a[1].value() / n) / (n - 1.0));
}

double EnsembleStats::mean_width(std::size_t cp) const { return beam_.at(cp)[0].value() / count_; }
double EnsembleStats::mean_norm(std::size_t cp) const { return beam_.at(cp)[1].value() / count_; }

std::array<double, 2> EnsembleStats::mean_centroid(std::size_t cp) const {
  return {beam_.at(cp)[4].value() / count_, beam_.at(cp)[5].value() / count_};
}

double EnsembleStats::var_centroid(std::size_t cp, int axis) const {
  if (count_ < 2) return 0.0;
  const auto& b = beam_.at(cp);
  const auto n = static_cast<double>(count_);
  const double s = b[4 + axis].value(), s2 = b[6 + axis].value();
  return std::max(0.0, (s2 - s * s / n) / (n - 1.0));
}

double EnsembleStats::scintillation(std::size_t cp) const {
  const auto& b = beam_.at(cp);
  const double m1 = b[2].value() / count_;
  const double m2 = b[3].value() / count_;
  return m2 / (m1 * m1) - 1.0;
}

std::vector<Complex> EnsembleStats::mean_field(std::size_t cp) const {
  if (!has_mean_field()) throw ConfigError("mean field was not accumulated");
  std::vector<Complex> m(grid_points_);
  for (std::size_t i = 0; i < grid_points_; ++i) {
    const auto& f = field_.at(cp * grid_points_ + i);
    m[i] = {f[0].value() / count_, f[1].value() / count_};
  }
  return m;
}

std::vector<double> EnsembleStats::samples(std::size_t cp, std::size_t theta, bool imaginary) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& [idx, rec] : records_) {
    const auto v = rec.checkpoints.at(cp).obs.at(theta);
    out.push_back(imaginary ? v.imag() : v.real());
  }
  return out;
}

bool EnsembleStats::operator==(const EnsembleStats& other) const {
  if (cps_ != other.cps_ || thetas_ != other.thetas_ || count_ != other.count_ || grid_points_ != other.grid_points_) {
    return false;
  }
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    for (int k = 0; k < 4; ++k) {
      if (!(obs_[i][k] == other.obs_[i][k])) return false;
    }
  }
  for (std::size_t i = 0; i < beam_.size(); ++i) {
    for (int k = 0; k < 8; ++k) {
      if (!(beam_[i][k] == other.beam_[i][k])) return false;
    }
  }
  for (std::size_t i = 0; i < field_.size(); ++i) {
    if (!(field_[i][0] == other.field_[i][0]) || !(field_[i][1] == other.field_[i][1])) return false;
  }
  return true;
}

double energy_distance(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ConfigError("energy distance needs two non-empty samples");
  std::vector<double> pool(x.begin(), x.end());
  pool.insert(pool.end(), y.begin(), y.end());
  std::sort(pool.begin(), pool.end());
  const double sx = pair_sum(x), sy = pair_sum(y);
  const double cross = pair_sum_sorted(pool) - sx - sy;
  const auto n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  const double d = 2.0 * cross / (n * m) - 2.0 * sx / (n * n) - 2.0 * sy / (m * m);
  return std::max(0.0, d);
}

double mean_abs_difference(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const auto n = static_cast<double>(x.size());
  return 2.0 * pair_sum(x) / (n * (n - 1.0));
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace beamwave
