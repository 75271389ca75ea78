#include "beamwave/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "beamwave/error.hpp"

namespace beamwave {

namespace {

std::array<double, 2> point_of(const GridSpec& grid, std::size_t idx) {
  if (grid.dim_t == 1) return {grid.coord(static_cast<int>(idx)), 0.0};
  return {grid.coord(static_cast<int>(idx / grid.n)), grid.coord(static_cast<int>(idx % grid.n))};
}

bool same_transverse(const GridSpec& a, const GridSpec& b) {
  return a.dim_t == b.dim_t && a.n == b.n && a.dx == b.dx;
}

void check_norm(double norm, double norm0, double tolerance, std::size_t step, double z) {
  const double drift = std::abs(norm / norm0 - 1.0);
  if (!(drift <= tolerance)) {
    std::ostringstream os;
    os << "norm drift " << drift << " exceeds " << tolerance << " at step " << step << " (z = " << z << ")";
    throw InvariantViolation(os.str());
  }
}

}  // namespace

void SimConfig::validate() const {
  if (!(k_tilde > 0.0)) throw ConfigError("k_tilde must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(width > 0.0)) throw ConfigError("initial width must be positive");
  spectrum.validate();
  grid.validate();
  if (!(z_final > 0.0) || !std::isfinite(z_final)) throw ConfigError("z_final must be positive");
  if (!(dz_solver > 0.0)) throw ConfigError("dz_solver must be positive");
  if (!(absorber_rate >= 0.0) || !std::isfinite(absorber_rate)) throw ConfigError("absorber_rate must be >= 0");
  if (dz_solver > grid.dz * eps * eps * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dz_solver " << dz_solver << " exceeds one compressed slab dz * eps^2 = " << grid.dz * eps * eps;
    throw ConfigError(os.str());
  }
  if (initial == InitialKind::Custom && custom.size() != grid.points()) {
    throw ConfigError("custom initial field does not match the grid");
  }
  double prev = 0.0;
  for (double c : checkpoints) {
    if (!(c > prev) || c > z_final) throw ConfigError("checkpoints must increase strictly inside (0, z_final]");
    prev = c;
  }
}

std::vector<std::string> SimConfig::warnings() const {
  auto out = resolution_warnings(grid, spectrum);
  const double fresnel = M_PI * dz_solver / k_tilde;
  if (grid.dx * grid.dx > fresnel) {
    std::ostringstream os;
    os << "Fresnel sampling: dx^2 / (pi dz / k) = " << grid.dx * grid.dx / fresnel << " > 1";
    out.push_back(os.str());
  }
  return out;
}

std::vector<double> SimConfig::checkpoint_list() const {
  if (checkpoints.empty()) return {z_final};
  return checkpoints;
}

int boundary_ring_width(const GridSpec& grid) { return std::max(1, grid.n / 16); }

bool in_boundary_ring(const GridSpec& grid, std::size_t idx) {
  const int w = boundary_ring_width(grid);
  const auto edge = [&](int j) { return j < w || j >= grid.n - w; };
  if (grid.dim_t == 1) return edge(static_cast<int>(idx));
  return edge(static_cast<int>(idx / grid.n)) || edge(static_cast<int>(idx % grid.n));
}

std::vector<double> absorber_profile(const GridSpec& grid) {
  const int w = boundary_ring_width(grid);
  std::vector<double> axis(grid.n, 0.0);
  for (int j = 0; j < grid.n; ++j) {
    const int d = std::min(j, grid.n - 1 - j);
    if (d < w) axis[j] = std::pow(std::cos(0.5 * M_PI * (d + 0.5) / w), 2);
  }
  std::vector<double> out(grid.points());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = grid.dim_t == 1 ? axis[i] : std::max(axis[i / grid.n], axis[i % grid.n]);
  }
  return out;
}

double l2_norm(const WaveField& field) {
  double s = 0.0;
  for (const auto& v : field.values) s += std::norm(v);
  return std::sqrt(s * field.grid.cell());
}

WaveField initial_field(const SimConfig& config) {
  config.validate();
  WaveField f;
  f.grid = config.grid;
  f.k_tilde = config.k_tilde;
  f.values.resize(config.grid.points());
  if (config.initial == InitialKind::Gaussian) {
    const double a = config.gamma / (2.0 * config.width * config.width);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = std::exp(-a * config.grid.radius2(i));
  } else {
    f.values = config.custom;
  }
  double total = 0.0, ring = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double e = std::norm(f.values[i]);
    total += e;
    if (in_boundary_ring(f.grid, i)) ring += e;
  }
  if (!(total > 0.0)) throw ConfigError("initial field is zero");
  if (ring > 1e-8 * total) {
    std::ostringstream os;
    os << "initial field has " << ring / total << " of its energy on the boundary ring (limit 1e-8)";
    throw ConfigError(os.str());
  }
  return f;
}

FreeFlow::FreeFlow(const GridSpec& grid, double k_tilde)
    : grid_(grid), k_tilde_(k_tilde), fft_(grid.dim_t, grid.n), p2_(grid.points()) {
  for (std::size_t i = 0; i < p2_.size(); ++i) p2_[i] = grid.wavenumber2(i);
}

const std::vector<Complex>& FreeFlow::multiplier(double dz) {
  for (const auto& [key, m] : cache_) {
    if (key == dz) return m;
  }
  if (cache_.size() >= 4) cache_.erase(cache_.begin());
  const double scale = 1.0 / static_cast<double>(p2_.size());
  std::vector<Complex> m(p2_.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::polar(scale, -p2_[i] * dz / (2.0 * k_tilde_));
  cache_.emplace_back(dz, std::move(m));
  return cache_.back().second;
}

void FreeFlow::apply(std::span<Complex> values, double dz) {
  if (dz == 0.0) return;
  const auto& m = multiplier(dz);
  fft_.forward(values);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] *= m[i];
  fft_.backward(values);
}

WaveField free_step(const WaveField& field, double dz) {
  WaveField out = field;
  FreeFlow(field.grid, field.k_tilde).apply(out.values, dz);
  out.z += dz;
  return out;
}

void apply_phase(std::span<Complex> values, std::span<const double> slab, double coeff) {
  if (slab.size() != values.size()) throw ConfigError("phase screen does not match the field grid");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] *= std::polar(1.0, coeff * slab[i]);
}

WaveField phase_step(const WaveField& field, std::span<const double> slab, double coeff) {
  WaveField out = field;
  apply_phase(out.values, slab, coeff);
  return out;
}

std::vector<double> step_partition(const SimConfig& config) {
  const auto cps = config.checkpoint_list();
  return step_partition(cps, config.dz_solver);
}

std::vector<double> step_partition(std::span<const double> checkpoints, double dz) {
  std::vector<double> pts{0.0};
  double start = 0.0;
  for (double c : checkpoints) {
    const auto steps = static_cast<long>(std::ceil((c - start) / dz * (1.0 - 1e-12)));
    const long count = std::max(1L, steps);
    for (long s = 1; s < count; ++s) pts.push_back(start + (c - start) * static_cast<double>(s) / count);
    pts.push_back(c);
    start = c;
  }
  return pts;
}

std::vector<double> slab_integral(const ScreenStack& stack, double za, double zb, double eps) {
  const double e2 = eps * eps;
  const double ta = za / e2;
  const double tb = zb / e2;
  const double end = stack.z0 + stack.extent();
  if (tb > end * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "screen stack exhausted: need t up to " << tb << ", stack ends at " << end;
    throw ConfigError(os.str());
  }
  std::vector<double> out(stack.grid.points(), 0.0);
  for (int j = slab_index(stack, ta); j < stack.grid.nz; ++j) {
    const double s0 = stack.z0 + j * stack.grid.dz;
    if (s0 >= tb) break;
    const double overlap = std::min(tb, s0 + stack.grid.dz) - std::max(ta, s0);
    if (overlap <= 0.0) continue;
    const auto slab = stack.slab(j);
    const double w = overlap * e2;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * slab[i];
  }
  return out;
}

Trajectory propagate(const SimConfig& config, const ScreenStack& stack, std::span<const TestFunction> thetas,
                     PropagateOptions options) {
  config.validate();
  if (!same_transverse(config.grid, stack.grid)) throw ConfigError("screen stack grid does not match the solver grid");
  for (const auto& t : thetas) check_test_function(config.grid, t);
  WaveField field = initial_field(config);
  const double norm0 = l2_norm(field);
  const auto pts = step_partition(config);
  const auto cps = config.checkpoint_list();
  const double coeff = config.k_tilde / config.eps;
  FreeFlow flow(config.grid, config.k_tilde);
  const bool absorbing = config.absorber_rate > 0.0;
  const auto profile = absorbing ? absorber_profile(config.grid) : std::vector<double>();
  // With the absorber on, the norm may only decrease.
  const auto check = [&](double norm, std::size_t step, double z) {
    if (!absorbing) return check_norm(norm, norm0, options.norm_tolerance, step, z);
    if (norm > norm0 * (1.0 + options.norm_tolerance)) check_norm(norm, norm0, options.norm_tolerance, step, z);
  };
  Trajectory traj;
  std::size_t next_cp = 0;
  double pending = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double za = pts[k], zb = pts[k + 1];
    const double h = zb - za;
    flow.apply(field.values, pending + h / 2.0);
    apply_phase(field.values, slab_integral(stack, za, zb, config.eps), coeff);
    if (absorbing) {
      for (std::size_t i = 0; i < profile.size(); ++i) field.values[i] *= std::exp(-config.absorber_rate * profile[i] * h);
    }
    pending = h / 2.0;
    field.z = zb;
    if (next_cp < cps.size() && zb == cps[next_cp]) {
      flow.apply(field.values, pending);
      pending = 0.0;
      auto rec = measure(field, thetas);
      check(rec.norm, k + 1, zb);
      traj.records.push_back(std::move(rec));
      if (options.keep_fields) traj.fields.push_back(field);
      ++next_cp;
    } else {
      check(l2_norm(field), k + 1, zb);
    }
  }
  return traj;
}

WaveField reverse_propagate(const SimConfig& config, const ScreenStack& stack, const WaveField& field) {
  config.validate();
  if (config.absorber_rate > 0.0) throw ConfigError("an absorbing run cannot be reversed");
  if (!same_transverse(config.grid, stack.grid)) throw ConfigError("screen stack grid does not match the solver grid");
  const auto pts = step_partition(config);
  const double coeff = config.k_tilde / config.eps;
  FreeFlow flow(config.grid, config.k_tilde);
  WaveField out = field;
  for (std::size_t k = pts.size() - 1; k > 0; --k) {
    const double za = pts[k - 1], zb = pts[k];
    const double h = zb - za;
    flow.apply(out.values, -h / 2.0);
    apply_phase(out.values, slab_integral(stack, za, zb, config.eps), -coeff);
    flow.apply(out.values, -h / 2.0);
  }
  out.z = 0.0;
  return out;
}

void check_test_function(const GridSpec& grid, const TestFunction& theta) {
  if (theta.values.size() != grid.points()) throw ConfigError("test function '" + theta.name + "' does not match the grid");
  double peak = 0.0, ring = 0.0;
  for (std::size_t i = 0; i < theta.values.size(); ++i) {
    const double a = std::abs(theta.values[i]);
    peak = std::max(peak, a);
    if (in_boundary_ring(grid, i)) ring = std::max(ring, a);
  }
  if (ring > 1e-8 * peak) {
    std::ostringstream os;
    os << "test function '" << theta.name << "' reaches " << ring / peak << " of its peak on the boundary ring";
    throw ConfigError(os.str());
  }
}

Complex observe(std::span<const Complex> values, const GridSpec& grid, const TestFunction& theta) {
  if (theta.values.size() != values.size()) throw ConfigError("test function does not match the field grid");
  Complex s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * theta.values[i];
  return s * grid.cell();
}

Complex observe(const WaveField& field, const TestFunction& theta) {
  check_test_function(field.grid, theta);
  return observe(field.values, field.grid, theta);
}

std::array<double, 2> centroid(const WaveField& field) {
  double total = 0.0;
  std::array<double, 2> c{0.0, 0.0};
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double e = std::norm(field.values[i]);
    const auto x = point_of(field.grid, i);
    total += e;
    c[0] += e * x[0];
    c[1] += e * x[1];
  }
  if (total > 0.0) {
    c[0] /= total;
    c[1] /= total;
  }
  return c;
}

double beam_width(const WaveField& field) {
  const auto c = centroid(field);
  double total = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double e = std::norm(field.values[i]);
    const auto x = point_of(field.grid, i);
    const double d0 = x[0] - c[0];
    const double d1 = field.grid.dim_t == 2 ? x[1] - c[1] : 0.0;
    total += e;
    m2 += e * (d0 * d0 + d1 * d1);
  }
  if (!(total > 0.0)) return 0.0;
  return std::sqrt(2.0 / field.grid.dim_t * m2 / total);
}

double peak_intensity(const WaveField& field) {
  double p = 0.0;
  for (const auto& v : field.values) p = std::max(p, std::norm(v));
  return p;
}

CheckpointRecord measure(const WaveField& field, std::span<const TestFunction> thetas) {
  CheckpointRecord r;
  r.z = field.z;
  r.norm = l2_norm(field);
  r.width = beam_width(field);
  r.peak_intensity = peak_intensity(field);
  r.centroid = centroid(field);
  r.obs.reserve(thetas.size());
  for (const auto& t : thetas) r.obs.push_back(observe(field.values, field.grid, t));
  return r;
}

TestFunction gaussian_test(const GridSpec& grid, std::array<double, 2> center, double width, std::string name) {
  grid.validate();
  TestFunction t;
  t.name = std::move(name);
  t.values.resize(grid.points());
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    const auto x = point_of(grid, i);
    const double d0 = x[0] - center[0];
    const double d1 = grid.dim_t == 2 ? x[1] - center[1] : 0.0;
    t.values[i] = std::exp(-(d0 * d0 + d1 * d1) / (2.0 * width * width));
  }
  return t;
}

}  // namespace beamwave
