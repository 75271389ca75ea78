#include "beamwave/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "beamwave/error.hpp"
#include "beamwave/quadrature.hpp"

namespace beamwave {

namespace {

quad::Options hankel_options() {
  quad::Options o;
  o.rel = 1e-11;
  o.abs = 1e-16;
  return o;
}

void require_pinned(const SpectrumParams& params) {
  params.validate();
  if (params.H >= 0.5) {
    throw DivergenceError("origin-pinned covariance is convergent only if H<1/2 (got H=" + std::to_string(params.H) + ")");
  }
  if (params.eta != 0.0 || params.rho_finite()) {
    throw ConfigError("origin-pinned kernel needs eta = 0 and rho = inf");
  }
}

std::vector<double> with_radius(std::vector<double> scales, double r) {
  if (r > 0.0) scales.push_back(1.0 / r);
  return scales;
}

}  // namespace

std::string to_string(KernelMode m) {
  switch (m) {
    case KernelMode::Finite: return "finite";
    case KernelMode::RhoInfinite: return "rho_infinite";
    case KernelMode::OriginPinned: return "origin_pinned";
  }
  return "unknown";
}

KernelMode kernel_mode(const SpectrumParams& params) {
  params.validate();
  if (params.eta > 0.0) return params.rho_finite() ? KernelMode::Finite : KernelMode::RhoInfinite;
  if (params.rho_finite()) {
    throw ConfigError("eta = 0 with finite rho has no limiting kernel; use rho = inf for the origin-pinned model");
  }
  require_pinned(params);
  return KernelMode::OriginPinned;
}

double gamma1_radial(const SpectrumParams& params, double r) {
  params.validate();
  if (params.eta == 0.0) {
    throw DivergenceError("Gamma1 diverges when eta = 0; use the origin-pinned kernel instead");
  }
  if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("gamma1_radial needs a finite r >= 0");
  const auto f = [&](double p) { return eval_radial(params, p) * p; };
  const auto scales = params.scales();
  return 2.0 * M_PI * M_PI * quad::oscillatory(f, quad::Kernel::J0, r, 0.0, scales, hankel_options());
}

double structure_function(const SpectrumParams& params, double r) {
  params.validate();
  if (params.eta == 0.0 && params.H >= 0.5) {
    throw DivergenceError("structure function with eta = 0 is convergent only if H<1/2");
  }
  if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("structure function needs a finite r >= 0");
  if (r == 0.0) return 0.0;
  auto opt = hankel_options();
  opt.singular_at_zero = params.eta == 0.0;
  const auto scales = with_radius(params.scales(), r);
  const auto phi_p = [&](double p) { return eval_radial(params, p) * p; };
  double smax = 0.0;
  for (double s : scales) smax = std::max(smax, s);
  const double split = std::max(quad::kernel_zero(quad::Kernel::J0, 1) / r, 2.0 * smax);
  const double head =
      quad::segmented([&](double p) { return quad::one_minus_j0(p * r) * phi_p(p); }, 0.0, split, scales, opt);
  const double flat = quad::to_infinity(phi_p, split, scales, opt);
  const double wave = quad::oscillatory(phi_p, quad::Kernel::J0, r, split, scales, opt);
  return 4.0 * M_PI * M_PI * (head + flat - wave);
}

double gamma_prime_structure(const SpectrumParams& params, double r) {
  require_pinned(params);
  return structure_function(params, r);
}

double gamma_prime_cross(const SpectrumParams& params, const std::array<double, 2>& x,
                         const std::array<double, 2>& y) {
  require_pinned(params);
  const double a = std::hypot(x[0], x[1]);
  const double b = std::hypot(y[0], y[1]);
  const double c = std::hypot(x[0] - y[0], x[1] - y[1]);
  if (a == 0.0 || b == 0.0) return 0.0;
  auto opt = hankel_options();
  opt.singular_at_zero = true;
  std::vector<double> scales = params.scales();
  for (double s : {a, b, c}) {
    if (s > 0.0) scales.push_back(1.0 / s);
  }
  const double fastest = std::max({a, b, c});
  const double split = 4.0 * quad::kernel_zero(quad::Kernel::J0, 1) / fastest;
  const auto phi_p = [&](double p) { return eval_radial(params, p) * p; };
  // 1 - J0(ap) - J0(bp) + J0(cp), arranged to avoid cancellation near p = 0.
  const auto combined = [&](double p) {
    return (quad::one_minus_j0(a * p) + quad::one_minus_j0(b * p) - quad::one_minus_j0(c * p)) * phi_p(p);
  };
  const double head = quad::segmented(combined, 0.0, split, scales, opt);
  double tail = quad::to_infinity(phi_p, split, scales, opt);
  tail -= quad::oscillatory(phi_p, quad::Kernel::J0, a, split, scales, opt);
  tail -= quad::oscillatory(phi_p, quad::Kernel::J0, b, split, scales, opt);
  if (c > 0.0) {
    tail += quad::oscillatory(phi_p, quad::Kernel::J0, c, split, scales, opt);
  } else {
    tail += quad::to_infinity(phi_p, split, scales, opt);
  }
  return 2.0 * M_PI * M_PI * (head + tail);
}

std::vector<double> transverse_spectrum(const SpectrumParams& params, const GridSpec& grid) {
  grid.validate();
  std::vector<double> s(grid.points());
  if (grid.dim_t == 2) {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = eval_radial(params, std::sqrt(grid.wavenumber2(i)));
    return s;
  }
  // |p| takes n/2 + 1 distinct values on the 1D lattice.
  std::vector<double> unique(grid.n / 2 + 1);
  for (int j = 0; j <= grid.n / 2; ++j) unique[j] = PlanarMarginal::direct(params, std::abs(grid.wavenumber(j)));
  for (int j = 0; j < grid.n; ++j) s[j] = unique[j <= grid.n / 2 ? j : grid.n - j];
  return s;
}

CovarianceKernel CovarianceKernel::build(const SpectrumParams& params, const GridSpec& grid, KernelOptions options) {
  grid.validate();
  CovarianceKernel k;
  k.mode_ = kernel_mode(params);
  k.params_ = params;
  k.grid_ = grid;
  // Four-point interpolation error scales as (dr * scale)^4. The slowest
  // scale sets the exponential tail, where relative accuracy is hardest.
  const auto sc = params.scales();
  const double fastest = *std::max_element(sc.begin(), sc.end());
  const double slowest = *std::min_element(sc.begin(), sc.end());
  k.dr_ = std::min({grid.dx / 2.0, 1.0 / (8.0 * fastest), 1.0 / (16.0 * slowest)});
  if (k.mode_ != KernelMode::OriginPinned) {
    k.gamma0_ = gamma1_radial(params, 0.0);
    const auto spectrum = transverse_spectrum(params, grid);
    const double dp = grid.dp();
    const double measure = grid.dim_t == 1 ? dp : dp * dp;
    k.weights_.resize(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) k.weights_[i] = M_PI * spectrum[i] * measure;
  }
  if (options.table || options.matrix) {
    const double r_max = grid.length() * (grid.dim_t == 2 ? std::sqrt(2.0) : 1.0);
    const auto count = static_cast<std::size_t>(std::ceil(r_max / k.dr_)) + 4;
    k.table_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double r = i * k.dr_;
      if (k.mode_ == KernelMode::OriginPinned) {
        k.table_[i] = i == 0 ? 0.0 : structure_function(params, r);
      } else {
        k.table_[i] = i == 0 ? k.gamma0_ : gamma1_radial(params, r);
      }
    }
  }
  if (options.matrix) {
    const auto npts = static_cast<Eigen::Index>(grid.points());
    k.matrix_.resize(npts, npts);
    for (Eigen::Index i = 0; i < npts; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = k.between(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        k.matrix_(i, j) = v;
        k.matrix_(j, i) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.matrix_, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    k.min_eigenvalue_ = ev.minCoeff();
    const double norm = ev.cwiseAbs().maxCoeff();
    if (k.min_eigenvalue_ < -options.psd_tolerance * norm) {
      std::ostringstream os;
      os << "covariance matrix is not positive semidefinite: smallest eigenvalue " << k.min_eigenvalue_
         << " against norm " << norm;
      throw InvariantViolation(os.str());
    }
  }
  return k;
}

CovarianceKernel build_kernel_grid(const SpectrumParams& params, const GridSpec& grid, KernelOptions options) {
  return CovarianceKernel::build(params, grid, options);
}

CovarianceKernel CovarianceKernel::vanishing(const GridSpec& grid) {
  grid.validate();
  CovarianceKernel k;
  k.grid_ = grid;
  k.dr_ = grid.dx / 2.0;
  k.weights_.assign(grid.points(), 0.0);
  const double r_max = grid.length() * (grid.dim_t == 2 ? std::sqrt(2.0) : 1.0);
  k.table_.assign(static_cast<std::size_t>(std::ceil(r_max / k.dr_)) + 4, 0.0);
  return k;
}

double CovarianceKernel::grid_gamma0() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double CovarianceKernel::radial(double r) const {
  r = std::abs(r);
  if (is_vanishing()) return 0.0;
  const auto direct = [&] {
    return mode_ == KernelMode::OriginPinned ? structure_function(*params_, r) : gamma1_radial(*params_, r);
  };
  if (table_.empty()) return direct();
  const double u = r / dr_;
  const auto i = static_cast<long>(std::floor(u));
  const double t = u - static_cast<double>(i);
  if (t == 0.0 && i < static_cast<long>(table_.size())) return table_[i];
  if (i + 2 >= static_cast<long>(table_.size())) return direct();
  // The r^(2H+1) cusp at the origin when rho = inf spoils interpolation near it.
  if (mode_ != KernelMode::Finite && i < 16) return direct();
  const auto at = [&](long j) { return table_[static_cast<std::size_t>(std::abs(j))]; };
  return -t * (t - 1) * (t - 2) / 6.0 * at(i - 1) + (t + 1) * (t - 1) * (t - 2) / 2.0 * at(i) -
         (t + 1) * t * (t - 2) / 2.0 * at(i + 1) + (t + 1) * t * (t - 1) / 6.0 * at(i + 2);
}

double CovarianceKernel::covariance(const std::array<double, 2>& x, const std::array<double, 2>& y) const {
  if (is_vanishing()) return 0.0;
  const double c = std::hypot(x[0] - y[0], x[1] - y[1]);
  if (mode_ != KernelMode::OriginPinned) return radial(c);
  const double a = std::hypot(x[0], x[1]);
  const double b = std::hypot(y[0], y[1]);
  if (a == 0.0 || b == 0.0) return 0.0;
  return 0.5 * (radial(a) + radial(b) - radial(c));
}

std::array<double, 2> CovarianceKernel::point(std::size_t idx) const {
  if (grid_.dim_t == 1) return {grid_.coord(static_cast<int>(idx)), 0.0};
  return {grid_.coord(static_cast<int>(idx / grid_.n)), grid_.coord(static_cast<int>(idx % grid_.n))};
}

double CovarianceKernel::between(std::size_t i, std::size_t j) const { return covariance(point(i), point(j)); }

void CovarianceKernel::export_csv(std::ostream& os) const {
  os << "r," << (mode_ == KernelMode::OriginPinned ? "structure" : "gamma") << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < table_.size(); ++i) os << i * dr_ << "," << table_[i] << "\n";
}

}  // namespace beamwave
