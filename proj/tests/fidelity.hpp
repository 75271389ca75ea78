#pragma once

// Ensemble checks of synthesized media against quadrature oracles, shared by
// the unit tests and the acceptance run.

#include <cmath>
#include <map>
#include <vector>

#include "beamwave/fft.hpp"
#include "beamwave/spectra.hpp"
#include "beamwave/synth.hpp"
#include "oracles.hpp"

namespace fidelity {

using namespace beamwave;

/// Phi2(s) = integral over q of Phi(sqrt(s^2 + q^2)), by fixed panels.
inline double planar_marginal_oracle(const SpectrumParams& p, double s) {
  // Needs a finite rho: the integrand then decays like q^(-2H-7).
  const double scale = std::max(1.0, s);
  return 2.0 * oracle::radial([&](double q) { return eval_radial(p, std::hypot(s, q)); }, 100.0 * scale,
                              0.25 * scale, 1e-14);
}

/// R(r) = 4 pi * integral of k^2 Phi(k) sin(kr)/(kr) dk.
inline double correlation_oracle(const SpectrumParams& p, double r) {
  const oracle::Fn f = [&](double k) {
    const double x = k * r;
    const double sinc = x < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    return k * k * eval_radial(p, k) * sinc;
  };
  return 4.0 * M_PI * oracle::radial(f, 2000.0, 0.1, 1e-14);
}

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  double ratio = 0.0;
  std::size_t modes = 0;
};

/// Mean periodogram |V^|^2 / N^2 of 2D (t, x) stacks against the oracle mode
/// variance Phi2 dxi dp, pooled over logarithmic bands of |kappa| between
/// the fundamental and 0.8 times the Nyquist radius.
inline std::vector<Band> band_ratios(const SpectrumParams& p, const Synthesizer& synth, std::size_t realizations,
                                     std::uint64_t seed, int bands = 6) {
  const GridSpec& g = synth.grid();
  const int nz = g.nz, n = g.n;
  const std::size_t N = static_cast<std::size_t>(nz) * n;
  const Fft fft(std::vector<int>{nz, n});
  std::vector<double> power(N, 0.0);
  std::vector<Complex> buf(N);
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto st = synth.draw(seed, r);
    for (std::size_t i = 0; i < N; ++i) buf[i] = st.values[i];
    fft.forward(buf);
    for (std::size_t i = 0; i < N; ++i) power[i] += std::norm(buf[i]) / (double(N) * double(N));
  }
  const double dxi = 2 * M_PI / (nz * g.dz), dp = g.dp();
  const double kmin = std::max(dxi, dp);
  const double kmax = 0.8 * std::min(M_PI / g.dz, M_PI / g.dx);
  std::vector<Band> out(bands);
  std::vector<double> num(bands, 0.0), den(bands, 0.0);
  for (int b = 0; b < bands; ++b) {
    out[b].lo = kmin * std::pow(kmax / kmin, double(b) / bands);
    out[b].hi = kmin * std::pow(kmax / kmin, double(b + 1) / bands);
  }
  // Oracle values are memoized per distinct radius.
  std::map<double, double> cache;
  auto phi2 = [&](double s) {
    auto it = cache.find(s);
    if (it == cache.end()) it = cache.emplace(s, planar_marginal_oracle(p, s)).first;
    return it->second;
  };
  for (int a = 0; a < nz; ++a) {
    const int ma = a <= nz / 2 ? a : a - nz;
    const double xi = ma * dxi;
    for (int j = 0; j < n; ++j) {
      const double k = std::hypot(xi, g.wavenumber(j));
      if (k < kmin || k >= kmax) continue;
      const int b = std::min(bands - 1, static_cast<int>(std::log(k / kmin) / std::log(kmax / kmin) * bands));
      num[b] += power[static_cast<std::size_t>(a) * n + j] / double(realizations);
      den[b] += phi2(k) * dxi * dp;
      ++out[b].modes;
    }
  }
  for (int b = 0; b < bands; ++b) out[b].ratio = den[b] > 0 ? num[b] / den[b] : 0.0;
  return out;
}

struct LagEstimate {
  double t = 0.0;
  double empirical = 0.0;
  double expected = 0.0;
  double se = 0.0;
};

/// Empirical R(t)/R(0) along the stack axis (transverse lag 0), with a
/// leave-one-out jackknife standard error over realizations.
inline std::vector<LagEstimate> longitudinal_ratios(const SpectrumParams& p, const Synthesizer& synth,
                                                    std::size_t realizations, std::uint64_t seed,
                                                    const std::vector<int>& lags) {
  const GridSpec& g = synth.grid();
  const std::size_t np = g.points();
  const std::size_t m = lags.size();
  std::vector<std::vector<double>> c(realizations, std::vector<double>(m + 1, 0.0));
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto st = synth.draw(seed, r);
    for (int j = 0; j < g.nz; ++j) {
      for (std::size_t x = 0; x < np; ++x) {
        const double v = st.values[j * np + x];
        c[r][0] += v * v;
        for (std::size_t l = 0; l < m; ++l) {
          c[r][l + 1] += v * st.values[((j + lags[l]) % g.nz) * np + x];
        }
      }
    }
  }
  std::vector<double> total(m + 1, 0.0);
  for (const auto& row : c) {
    for (std::size_t l = 0; l <= m; ++l) total[l] += row[l];
  }
  const double r0 = correlation_oracle(p, 0.0);
  std::vector<LagEstimate> out;
  const auto M = static_cast<double>(realizations);
  for (std::size_t l = 0; l < m; ++l) {
    LagEstimate e;
    e.t = lags[l] * g.dz;
    e.empirical = total[l + 1] / total[0];
    e.expected = correlation_oracle(p, e.t) / r0;
    double s = 0.0, s2 = 0.0;
    for (const auto& row : c) {
      const double loo = (total[l + 1] - row[l + 1]) / (total[0] - row[0]);
      s += loo;
      s2 += loo * loo;
    }
    const double mean = s / M;
    e.se = std::sqrt((M - 1) / M * std::max(0.0, s2 - M * mean * mean));
    out.push_back(e);
  }
  return out;
}

}  // namespace fidelity
