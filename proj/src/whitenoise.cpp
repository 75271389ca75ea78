#include "beamwave/whitenoise.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "beamwave/error.hpp"

namespace beamwave {

namespace {

std::size_t mirror_index(const GridSpec& grid, std::size_t idx) {
  const auto flip = [&](std::size_t j) { return (grid.n - j) % grid.n; };
  if (grid.dim_t == 1) return flip(idx);
  const std::size_t n = grid.n;
  return flip(idx / n) * n + flip(idx % n);
}

}  // namespace

void WnConfig::validate() const {
  if (!(k_tilde > 0.0)) throw ConfigError("k_tilde must be positive");
  if (!kernel) throw ConfigError("white-noise model needs a covariance kernel");
  if (!(dz > 0.0)) throw ConfigError("dz must be positive");
  if (!(z_final > 0.0) || !std::isfinite(z_final)) throw ConfigError("z_final must be positive");
  double prev = 0.0;
  for (double c : checkpoints) {
    if (!(c > prev) || c > z_final) throw ConfigError("checkpoints must increase strictly inside (0, z_final]");
    prev = c;
  }
  if (kernel->is_vanishing()) return;
  const bool pinned = kernel->mode() == KernelMode::OriginPinned;
  if (variant == WnVariant::OriginPinned && !pinned) throw ConfigError("origin-pinned variant needs an origin-pinned kernel");
  if (variant == WnVariant::Standard && pinned) throw ConfigError("standard variant cannot use an origin-pinned kernel");
  if (variant == WnVariant::Standard) {
    const double damping = dz * k_tilde * k_tilde * kernel->gamma0();
    if (damping > 0.1) {
      std::ostringstream os;
      os << "dz k^2 Gamma0 = " << damping << " exceeds 0.1; reduce dz";
      throw ConfigError(os.str());
    }
  }
}

std::vector<double> WnConfig::checkpoint_list() const {
  if (checkpoints.empty()) return {z_final};
  return checkpoints;
}

IncrementSampler::IncrementSampler(std::shared_ptr<const CovarianceKernel> kernel, WnVariant variant)
    : kernel_(std::move(kernel)), variant_(variant) {
  if (!kernel_) throw ConfigError("increment sampler needs a kernel");
  const GridSpec& grid = kernel_->grid();
  if (kernel_->is_vanishing()) return;
  if (variant_ == WnVariant::Standard) {
    const auto w = kernel_->spectral_weights();
    amplitude_.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) amplitude_[i] = std::sqrt(kWhiteNoiseScale * w[i]);
    fft_ = std::make_unique<Fft>(grid.dim_t, grid.n);
    buffer_.resize(w.size());
    spare_.resize(w.size());
    return;
  }
  if (!kernel_->has_matrix()) throw ConfigError("origin-pinned increments need the kernel matrix");
  const std::size_t origin = grid.origin_index();
  for (std::size_t i = 0; i < grid.points(); ++i) {
    if (i != origin) free_index_.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(free_index_.size());
  Eigen::MatrixXd reduced(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) reduced(a, b) = kernel_->matrix()(free_index_[a], free_index_[b]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
  if (es.info() != Eigen::Success) throw InvariantViolation("eigendecomposition of the pinned covariance failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = es.eigenvectors() * root.asDiagonal();
}

void IncrementSampler::draw(StreamRng& rng, double dz, std::span<double> out) {
  if (out.size() != kernel_->grid().points()) throw ConfigError("increment buffer does not match the grid");
  if (kernel_->is_vanishing()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (variant_ == WnVariant::Standard) {
    if (has_spare_ && spare_dz_ == dz) {
      std::copy(spare_.begin(), spare_.end(), out.begin());
      has_spare_ = false;
      return;
    }
    const double s = std::sqrt(dz);
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      buffer_[i] = s * amplitude_[i] * Complex(re, im);
    }
    fft_->backward(buffer_);
    // Real and imaginary parts are independent fields with the target covariance.
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      out[i] = buffer_[i].real();
      spare_[i] = buffer_[i].imag();
    }
    has_spare_ = true;
    spare_dz_ = dz;
    return;
  }
  Eigen::VectorXd g(factor_.cols());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  const Eigen::VectorXd v = std::sqrt(kWhiteNoiseScale * dz) * (factor_ * g);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < free_index_.size(); ++a) out[free_index_[a]] = v[static_cast<Eigen::Index>(a)];
}

std::vector<double> IncrementSampler::variance_per_dz() const {
  const std::size_t np = kernel_->grid().points();
  if (kernel_->is_vanishing()) return std::vector<double>(np, 0.0);
  if (variant_ == WnVariant::Standard) return std::vector<double>(np, kWhiteNoiseScale * kernel_->grid_gamma0());
  std::vector<double> v(np);
  for (std::size_t i = 0; i < np; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    v[i] = kWhiteNoiseScale * kernel_->matrix()(k, k);
  }
  return v;
}

Complex IncrementSampler::quadratic_form(std::span<const Complex> u) {
  if (kernel_->is_vanishing()) return 0.0;
  const GridSpec& grid = kernel_->grid();
  if (variant_ == WnVariant::Standard) {
    std::vector<Complex> U(u.begin(), u.end());
    fft_->forward(U);
    const auto w = kernel_->spectral_weights();
    Complex s = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i) s += w[i] * U[i] * U[mirror_index(grid, i)];
    return s;
  }
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd ur(n), ui(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ur[i] = u[i].real();
    ui[i] = u[i].imag();
  }
  const auto& M = kernel_->matrix();
  const Eigen::VectorXd mr = M * ur;
  const Eigen::VectorXd mi = M * ui;
  return {ur.dot(mr) - ui.dot(mi), 2.0 * ur.dot(mi)};
}

double IncrementSampler::hermitian_form(std::span<const Complex> u) {
  if (kernel_->is_vanishing()) return 0.0;
  if (variant_ == WnVariant::Standard) {
    std::vector<Complex> U(u.begin(), u.end());
    fft_->forward(U);
    const auto w = kernel_->spectral_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i) s += w[i] * std::norm(U[i]);
    return s;
  }
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd ur(n), ui(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ur[i] = u[i].real();
    ui[i] = u[i].imag();
  }
  const auto& M = kernel_->matrix();
  return ur.dot(M * ur) + ui.dot(M * ui);
}

std::vector<double> wn_increment(std::shared_ptr<const CovarianceKernel> kernel, WnVariant variant, double dz,
                                 StreamRng& rng) {
  IncrementSampler sampler(kernel, variant);
  std::vector<double> out(kernel->grid().points());
  sampler.draw(rng, dz, out);
  return out;
}

WnTrajectory wn_propagate(const WnConfig& config, const WaveField& F0, std::span<const TestFunction> thetas,
                          std::uint64_t seed, std::uint64_t realization, WnOptions options) {
  config.validate();
  const GridSpec& grid = config.grid();
  if (F0.grid.dim_t != grid.dim_t || F0.grid.n != grid.n || F0.grid.dx != grid.dx) {
    throw ConfigError("initial field grid does not match the kernel grid");
  }
  for (const auto& t : thetas) check_test_function(grid, t);
  if (options.qv_theta) check_test_function(grid, *options.qv_theta);

  IncrementSampler sampler(config.kernel, config.variant);
  FreeFlow flow(grid, config.k_tilde);
  StreamRng rng(seed, realization, Purpose::WhiteNoise);
  const double k = config.k_tilde;
  const double cell = grid.cell();
  const auto var_per_dz = sampler.variance_per_dz();

  const bool horizon_mode = options.qv_theta && options.qv_horizon > 0.0;
  if (horizon_mode && config.variant != WnVariant::Standard) {
    throw ConfigError("horizon-mode quadratic variation needs the standard variant");
  }
  // Tracked test function for the step starting at za with size h, and E[exp(i k dB)].
  std::vector<Complex> phi;
  double phi_key_a = std::nan(""), phi_key_h = std::nan("");
  std::vector<double> mean_factor;
  double mean_key_h = std::nan("");
  const auto tracked = [&](double za, double h) -> const std::vector<Complex>& {
    const bool reuse = !horizon_mode ? h == phi_key_h : (za == phi_key_a && h == phi_key_h);
    if (reuse) return phi;
    phi.assign(options.qv_theta->values.begin(), options.qv_theta->values.end());
    flow.apply(phi, horizon_mode ? options.qv_horizon - za - h / 2.0 : h / 2.0);
    phi_key_a = za;
    phi_key_h = h;
    return phi;
  };
  const auto mean_of_screen = [&](double h) -> const std::vector<double>& {
    if (h == mean_key_h) return mean_factor;
    mean_factor.resize(var_per_dz.size());
    for (std::size_t i = 0; i < var_per_dz.size(); ++i) mean_factor[i] = std::exp(-0.5 * k * k * var_per_dz[i] * h);
    mean_key_h = h;
    return mean_factor;
  };
  const double gamma0_grid = config.variant == WnVariant::Standard ? 0.5 * var_per_dz.front() : 0.0;

  WaveField field = F0;
  field.k_tilde = k;
  const double norm0 = l2_norm(field);
  const auto cps = config.checkpoint_list();
  const auto pts = step_partition(cps, config.dz);
  std::vector<double> dB(grid.points());
  std::vector<Complex> screen(grid.points());
  std::vector<Complex> u(grid.points());
  WnTrajectory out;
  QvPath qv;
  std::size_t next_cp = 0;
  double pending = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double za = pts[s], zb = pts[s + 1];
    const double h = zb - za;
    flow.apply(field.values, pending + h / 2.0);
    sampler.draw(rng, h, dB);
    for (std::size_t i = 0; i < screen.size(); ++i) screen[i] = std::polar(1.0, k * dB[i]);
    if (options.qv_theta && (!horizon_mode || zb <= options.qv_horizon * (1.0 + 1e-12))) {
      const auto& ph = tracked(za, h);
      const auto& m = mean_of_screen(h);
      // Horizon mode rescales by exp(k^2 Gamma0 za) so the tracked pairing is a martingale.
      const double weight = horizon_mode ? std::exp(k * k * gamma0_grid * za) : 1.0;
      Complex dm = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = field.values[i] * ph[i] * cell;
        dm += horizon_mode ? u[i] * (screen[i] / m[i] - 1.0) : u[i] * (screen[i] - m[i]);
      }
      qv.martingale += weight * dm;
      qv.predicted += -kWhiteNoiseScale * k * k * h * weight * weight * sampler.quadratic_form(u);
      qv.predicted_abs += kWhiteNoiseScale * k * k * h * weight * weight * sampler.hermitian_form(u);
    }
    for (std::size_t i = 0; i < screen.size(); ++i) field.values[i] *= screen[i];
    pending = h / 2.0;
    field.z = zb;
    if (next_cp < cps.size() && zb == cps[next_cp]) {
      flow.apply(field.values, pending);
      pending = 0.0;
      auto rec = measure(field, thetas);
      const double drift = std::abs(rec.norm / norm0 - 1.0);
      if (!(drift <= options.norm_tolerance)) {
        std::ostringstream os;
        os << "norm drift " << drift << " at step " << s + 1 << " (z = " << zb << ")";
        throw InvariantViolation(os.str());
      }
      out.trajectory.records.push_back(std::move(rec));
      if (options.keep_fields) out.trajectory.fields.push_back(field);
      if (options.qv_theta) out.qv.push_back(qv);
      ++next_cp;
    }
  }
  return out;
}

QvReport quadratic_variation_probe(std::span<const QvPath> paths, std::size_t min_realizations) {
  if (paths.size() < min_realizations || paths.size() < 2) {
    throw ConfigError("quadratic-variation probe needs at least " + std::to_string(min_realizations) + " realizations");
  }
  const auto m = static_cast<double>(paths.size());
  Complex sa = 0.0, sb = 0.0;
  for (const auto& p : paths) {
    sa += p.martingale * p.martingale;
    sb += p.predicted;
  }
  QvReport rep;
  rep.realizations = paths.size();
  rep.empirical = sa / m;
  rep.predicted = sb / m;
  for (const auto& p : paths) {
    rep.empirical_abs += std::norm(p.martingale) / m;
    rep.predicted_abs += p.predicted_abs / m;
  }
  if (std::abs(rep.predicted) == 0.0) {
    rep.ratio = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    return rep;
  }
  rep.ratio = rep.empirical / rep.predicted;
  std::vector<Complex> loo(paths.size());
  Complex mean_loo = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Complex a = (sa - paths[i].martingale * paths[i].martingale) / (m - 1.0);
    const Complex b = (sb - paths[i].predicted) / (m - 1.0);
    loo[i] = a / b;
    mean_loo += loo[i];
  }
  mean_loo /= m;
  double vr = 0.0, vi = 0.0;
  for (const auto& r : loo) {
    vr += std::pow(r.real() - mean_loo.real(), 2);
    vi += std::pow(r.imag() - mean_loo.imag(), 2);
  }
  rep.se_re = std::sqrt((m - 1.0) / m * vr);
  rep.se_im = std::sqrt((m - 1.0) / m * vi);
  return rep;
}

}  // namespace beamwave
