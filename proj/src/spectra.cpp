#include "beamwave/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "beamwave/error.hpp"
#include "beamwave/quadrature.hpp"

namespace beamwave {

namespace {

constexpr double kVonKarmanCutoff = 5.92;
constexpr double kHillCutoff = 3.3;
constexpr double kKolmogorovH = 1.0 / 3.0;

quad::Options tight() {
  quad::Options o;
  o.rel = 1e-11;
  return o;
}

}  // namespace

std::string to_string(SpectrumVariant v) {
  switch (v) {
    case SpectrumVariant::VonKarman: return "von_karman";
    case SpectrumVariant::Hill: return "hill";
    case SpectrumVariant::BoundedPowerLaw: return "bounded_power_law";
  }
  return "unknown";
}

SpectrumVariant variant_from_string(const std::string& name) {
  if (name == "von_karman") return SpectrumVariant::VonKarman;
  if (name == "hill") return SpectrumVariant::Hill;
  if (name == "bounded_power_law") return SpectrumVariant::BoundedPowerLaw;
  throw ConfigError("unknown spectrum variant '" + name + "'");
}

SpectrumParams SpectrumParams::bounded_power_law(double K, double H, double eta, double rho) {
  SpectrumParams p{SpectrumVariant::BoundedPowerLaw, H, eta, rho, K};
  p.validate();
  return p;
}

SpectrumParams SpectrumParams::von_karman(double amplitude, double eta, double rho) {
  SpectrumParams p{SpectrumVariant::VonKarman, kKolmogorovH, eta, rho, amplitude};
  p.validate();
  return p;
}

SpectrumParams SpectrumParams::hill(double amplitude, double eta, double rho) {
  SpectrumParams p{SpectrumVariant::Hill, kKolmogorovH, eta, rho, amplitude};
  p.validate();
  return p;
}

void SpectrumParams::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw ConfigError("spectrum amplitude must be positive and finite");
  if (!(H > 0.0 && H < 1.0)) throw ConfigError("spectral exponent H must lie in (0, 1)");
  if (variant != SpectrumVariant::BoundedPowerLaw && std::abs(H - kKolmogorovH) > 1e-12) {
    throw ConfigError("von Karman and Hill spectra have H = 1/3");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and >= 0");
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0 (inf allowed)");
  if (rho_finite() && !(eta < rho)) throw ConfigError("eta must be below rho (outer scale larger than inner scale)");
}

double SpectrumParams::cutoff() const {
  switch (variant) {
    case SpectrumVariant::VonKarman: return kVonKarmanCutoff * rho;
    case SpectrumVariant::Hill: return kHillCutoff * rho;
    case SpectrumVariant::BoundedPowerLaw: return rho;
  }
  return rho;
}

std::vector<double> SpectrumParams::scales() const {
  std::vector<double> s;
  if (eta > 0.0) s.push_back(eta);
  if (rho_finite()) {
    s.push_back(rho);
    if (variant != SpectrumVariant::BoundedPowerLaw) s.push_back(cutoff());
  }
  if (s.empty()) s.push_back(1.0);
  return s;
}

std::uint64_t SpectrumParams::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s|%.17g|%.17g|%.17g|%.17g", to_string(variant).c_str(), H, eta, rho,
                amplitude);
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* c = buf; *c; ++c) {
    h ^= static_cast<unsigned char>(*c);
    h *= 1099511628211ULL;
  }
  return h;
}

SpectrumSample eval_radial_checked(const SpectrumParams& params, double k) {
  if (!std::isfinite(k)) throw ConfigError("spectrum evaluated at a non-finite wavenumber");
  k = std::abs(k);
  const double k2 = k * k;
  switch (params.variant) {
    case SpectrumVariant::BoundedPowerLaw: {
      double v = params.amplitude * std::pow(params.eta * params.eta + k2, -params.H - 1.5);
      if (params.rho_finite()) {
        const double f = 1.0 + k2 / (params.rho * params.rho);
        v /= f * f;
      }
      return {v, false};
    }
    case SpectrumVariant::VonKarman:
    case SpectrumVariant::Hill: {
      const double km = params.cutoff();
      double v = params.amplitude * std::pow(k2 + params.eta * params.eta, -11.0 / 6.0);
      if (std::isfinite(km)) v *= std::exp(-k2 / (km * km));
      if (params.variant == SpectrumVariant::Hill && std::isfinite(km)) {
        const double s = k / km;
        const double bracket = 1.0 + 1.802 * s - 0.254 * std::pow(s, 7.0 / 6.0);
        if (bracket < 0.0) return {0.0, true};
        v *= bracket;
      }
      return {v, false};
    }
  }
  return {0.0, false};
}

double eval_radial(const SpectrumParams& params, double k) { return eval_radial_checked(params, k).value; }

double eval_spectrum(const SpectrumParams& params, const std::array<double, 3>& kappa) {
  for (double c : kappa) {
    if (!std::isfinite(c)) throw ConfigError("spectrum evaluated at a non-finite wavevector");
  }
  return eval_radial(params, std::hypot(kappa[0], kappa[1], kappa[2]));
}

double eval_transverse(const SpectrumParams& params, const std::array<double, 2>& p) {
  return eval_spectrum(params, {0.0, p[0], p[1]});
}

double laplacian_moment(const SpectrumParams& params) {
  params.validate();
  if (!params.rho_finite()) {
    throw DivergenceError("laplacian moment diverges for rho = inf (the inner scale must be finite)");
  }
  const auto scales = params.scales();
  const double radial = quad::to_infinity(
      [&](double k) { return std::pow(k, 6) * eval_radial(params, k); }, 0.0, scales, tight());
  // Angular factor: integral of sin^4 over the unit sphere.
  return 32.0 * M_PI / 15.0 * radial;
}

double total_variance(const SpectrumParams& params) {
  params.validate();
  if (params.eta == 0.0) {
    throw DivergenceError("point variance diverges at small wavenumbers when eta = 0 (outer scale limit)");
  }
  const auto scales = params.scales();
  return 4.0 * M_PI *
         quad::to_infinity([&](double k) { return k * k * eval_radial(params, k); }, 0.0, scales, tight());
}

double longitudinal_corr(const SpectrumParams& params, double t) {
  params.validate();
  if (params.eta == 0.0) {
    throw DivergenceError("longitudinal correlation undefined when eta = 0: the outer scale limit breaks integrability");
  }
  if (!std::isfinite(t)) throw ConfigError("longitudinal_corr needs a finite lag");
  t = std::abs(t);
  if (t == 0.0) return total_variance(params);
  const auto scales = params.scales();
  return 4.0 * M_PI *
         quad::oscillatory([&](double k) { return k * k * eval_radial(params, k); }, quad::Kernel::Sinc, t, 0.0,
                           scales, tight());
}

double correlation_integral(const SpectrumParams& params, double T) {
  const double r0 = total_variance(params);
  if (!(T >= 0.0)) throw ConfigError("correlation_integral needs T >= 0");
  if (std::isinf(T)) {
    // Integral of sin(kt)/(kt) over t in [0, inf) is pi / (2k).
    const auto scales = params.scales();
    const double v = 2.0 * M_PI * M_PI *
                     quad::to_infinity([&](double k) { return k * eval_radial(params, k); }, 0.0, scales, tight());
    return v / r0;
  }
  std::vector<double> tscales;
  for (double s : params.scales()) tscales.push_back(1.0 / s);
  quad::Options o;
  o.rel = 1e-9;
  return quad::segmented([&](double t) { return longitudinal_corr(params, t); }, 0.0, T, tscales, o) / r0;
}

PlanarMarginal::PlanarMarginal(const SpectrumParams& params, double s_min, double s_max) : params_(params) {
  params_.validate();
  if (params_.eta == 0.0) throw DivergenceError("planar marginal diverges at the origin when eta = 0");
  if (!(s_min > 0.0 && s_max > s_min)) throw ConfigError("planar marginal table needs 0 < s_min < s_max");
  constexpr int kPerDecade = 128;
  at_zero_ = direct(params_, 0.0);
  log_min_ = std::log(s_min) - 0.05;
  const double log_max = std::log(s_max) + 0.05;
  const int nodes = std::max(8, static_cast<int>(std::ceil((log_max - log_min_) / std::log(10.0) * kPerDecade)) + 1);
  log_step_ = (log_max - log_min_) / (nodes - 1);
  log_values_.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    log_values_[i] = std::log(direct(params_, std::exp(log_min_ + i * log_step_)));
  }
}

double PlanarMarginal::operator()(double s) const {
  s = std::abs(s);
  if (s == 0.0) return at_zero_;
  const double u = (std::log(s) - log_min_) / log_step_;
  const int last = static_cast<int>(log_values_.size()) - 1;
  if (u < 1.0 || u > last - 2) return direct(params_, s);
  // Four-point Lagrange interpolation in (log s, log Phi2).
  const int i = static_cast<int>(std::floor(u)) - 1;
  const double t = u - (i + 1);
  const double* y = &log_values_[i];
  const double v = -t * (t - 1) * (t - 2) / 6.0 * y[0] + (t + 1) * (t - 1) * (t - 2) / 2.0 * y[1] -
                   (t + 1) * t * (t - 2) / 2.0 * y[2] + (t + 1) * t * (t - 1) / 6.0 * y[3];
  return std::exp(v);
}

double PlanarMarginal::direct(const SpectrumParams& params, double s) {
  auto scales = params.scales();
  if (s > 0.0) scales.push_back(s);
  quad::Options o;
  o.rel = 1e-11;
  return 2.0 * quad::to_infinity([&](double q) { return eval_radial(params, std::hypot(s, q)); }, 0.0, scales, o);
}

}  // namespace beamwave
