#include "beamwave/moments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "beamwave/error.hpp"
#include "beamwave/fft.hpp"

namespace beamwave {

namespace {

constexpr std::size_t kMaxProductPoints = std::size_t{1} << 22;

std::size_t product_points(const GridSpec& grid, int order) {
  std::size_t total = 1;
  for (int i = 0; i < order; ++i) total *= grid.points();
  return total;
}

}  // namespace

WaveField mean_field_exact(const WaveField& F0, double z, double k_tilde, double gamma0) {
  WaveField f = F0;
  f.k_tilde = k_tilde;
  FreeFlow(F0.grid, k_tilde).apply(f.values, z);
  const double damp = std::exp(-k_tilde * k_tilde * gamma0 * z);
  for (auto& v : f.values) v *= damp;
  f.z = F0.z + z;
  return f;
}

MomentField tensor_initial(const WaveField& F0, int order) {
  if (order != 1 && order != 2) throw ConfigError("moment order must be 1 or 2");
  MomentField m;
  m.order = order;
  m.grid = F0.grid;
  m.z = F0.z;
  if (order == 1) {
    m.values = F0.values;
    return m;
  }
  const std::size_t np = F0.values.size();
  if (np * np > kMaxProductPoints) throw ConfigError("two-point product grid exceeds the memory bound");
  m.values.resize(np * np);
  for (std::size_t a = 0; a < np; ++a) {
    for (std::size_t b = 0; b < np; ++b) m.values[a * np + b] = F0.values[a] * F0.values[b];
  }
  return m;
}

GridCovariance::GridCovariance(const CovarianceKernel& kernel) : kernel_(&kernel) {
  vanishing_ = kernel.is_vanishing();
  if (vanishing_) return;
  pinned_ = kernel.mode() == KernelMode::OriginPinned;
  if (pinned_) {
    if (!kernel.has_matrix()) throw ConfigError("pinned moment equations need the kernel matrix");
    return;
  }
  // Gamma on the torus at every lattice displacement: inverse transform of the weights.
  const auto w = kernel.spectral_weights();
  std::vector<Complex> buf(w.begin(), w.end());
  Fft(kernel.grid().dim_t, kernel.grid().n).backward(buf);
  lag_.resize(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) lag_[i] = buf[i].real();
}

double GridCovariance::operator()(std::size_t i, std::size_t j) const {
  if (vanishing_) return 0.0;
  if (pinned_) return kernel_->matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const GridSpec& g = kernel_->grid();
  const std::size_t n = g.n;
  const auto diff = [n](std::size_t a, std::size_t b) { return (a + n - b) % n; };
  if (g.dim_t == 1) return lag_[diff(i, j)];
  return lag_[diff(i / n, j / n) * n + diff(i % n, j % n)];
}

std::vector<double> damping_field(const CovarianceKernel& kernel, int order, double k_tilde) {
  if (order != 1 && order != 2) throw ConfigError("moment order must be 1 or 2");
  const GridSpec& grid = kernel.grid();
  const std::size_t np = grid.points();
  if (product_points(grid, order) > kMaxProductPoints) throw ConfigError("product grid exceeds the memory bound");
  const GridCovariance cov(kernel);
  const double k2 = k_tilde * k_tilde;
  std::vector<double> c2;
  if (order == 1) {
    c2.resize(np);
    for (std::size_t a = 0; a < np; ++a) c2[a] = -k2 * cov(a, a);
  } else {
    c2.resize(np * np);
    for (std::size_t a = 0; a < np; ++a) {
      for (std::size_t b = 0; b < np; ++b) c2[a * np + b] = -k2 * (cov(a, a) + cov(b, b) + 2.0 * cov(a, b));
    }
  }
  double scale = 0.0;
  for (double v : c2) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < c2.size(); ++i) {
    if (c2[i] > 1e-12 * scale) {
      std::ostringstream os;
      os << "damping coefficient C2 = " << c2[i] << " > 0 at product index " << i;
      throw InvariantViolation(os.str());
    }
  }
  return c2;
}

MomentField solve_npt(const MomentField& F0, const CovarianceKernel& kernel, double k_tilde, double z, double dz) {
  if (!(k_tilde > 0.0)) throw ConfigError("k_tilde must be positive");
  if (!(dz > 0.0) || !(z >= 0.0)) throw ConfigError("solve_npt needs dz > 0 and z >= 0");
  const GridSpec& grid = kernel.grid();
  if (F0.grid.dim_t != grid.dim_t || F0.grid.n != grid.n || F0.grid.dx != grid.dx) {
    throw ConfigError("moment field grid does not match the kernel grid");
  }
  if (F0.values.size() != product_points(grid, F0.order)) throw ConfigError("moment field has the wrong size");
  const auto c2 = damping_field(kernel, F0.order, k_tilde);

  const int rank = F0.order * grid.dim_t;
  const Fft fft(rank, grid.n);
  // Sum of |p_j|^2 over the product axes.
  std::vector<double> p2(F0.values.size(), 0.0);
  for (std::size_t i = 0; i < p2.size(); ++i) {
    std::size_t rest = i;
    double s = 0.0;
    for (int axis = 0; axis < rank; ++axis) {
      const double p = grid.wavenumber(static_cast<int>(rest % grid.n));
      s += p * p;
      rest /= grid.n;
    }
    p2[i] = s;
  }
  const double norm = 1.0 / static_cast<double>(p2.size());
  const auto free_flow = [&](std::vector<Complex>& v, double h) {
    if (h == 0.0) return;
    fft.forward(v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(norm, -p2[i] * h / (2.0 * k_tilde));
    fft.backward(v);
  };

  MomentField f = F0;
  const auto steps = std::max(1L, static_cast<long>(std::ceil(z / dz * (1.0 - 1e-12))));
  const double h = z / static_cast<double>(steps);
  std::vector<double> decay(c2.size());
  for (std::size_t i = 0; i < c2.size(); ++i) decay[i] = std::exp(c2[i] * h);
  if (z > 0.0) {
    free_flow(f.values, h / 2.0);
    for (long s = 0; s < steps; ++s) {
      for (std::size_t i = 0; i < decay.size(); ++i) f.values[i] *= decay[i];
      free_flow(f.values, s + 1 < steps ? h : h / 2.0);
    }
  }
  f.z = F0.z + z;
  return f;
}

double l2_norm(const MomentField& field) {
  double s = 0.0;
  for (const auto& v : field.values) s += std::norm(v);
  return std::sqrt(s * std::pow(field.grid.cell(), field.order));
}

void export_slice_csv(std::ostream& os, const MomentField& field) {
  const GridSpec& g = field.grid;
  const std::size_t np = g.points();
  const std::size_t origin = g.origin_index();
  os << "x,re,im\n";
  os.precision(17);
  for (int j = 0; j < g.n; ++j) {
    const std::size_t x1 = g.dim_t == 1 ? static_cast<std::size_t>(j) : static_cast<std::size_t>(j) * g.n + g.n / 2;
    const std::size_t idx = field.order == 1 ? x1 : x1 * np + origin;
    os << g.coord(j) << "," << field.values[idx].real() << "," << field.values[idx].imag() << "\n";
  }
}

}  // namespace beamwave
