#include <cmath>
#include <sstream>

#include "beamwave/error.hpp"
#include "beamwave/rng.hpp"
#include "beamwave/synth.hpp"
#include "doctest.h"
#include "fidelity.hpp"

using namespace beamwave;

namespace {

const SpectrumParams kMedium = SpectrumParams::bounded_power_law(1.0, 1.0 / 3.0, 1.0, 4.0);

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments summarize(const std::vector<double>& v) {
  const auto m = static_cast<double>(v.size());
  double s = 0.0, s2 = 0.0;
  for (double x : v) s += x, s2 += x * x;
  const double mean = s / m;
  return {mean, std::sqrt((s2 / m - mean * mean) / (m - 1))};
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("Philox block function matches the Random123 known-answer vectors") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed gives bit-identical stacks") {
  GridSpec g{1, 32, 0.25, 16, 0.25};
  const auto a = synth_volume(kMedium, g, 42, 3);
  const auto b = synth_volume(kMedium, g, 42, 3);
  CHECK(a.values == b.values);
  CHECK(synth_volume(kMedium, g, 42, 4).values != a.values);
  CHECK(synth_volume(kMedium, g, 43, 3).values != a.values);
  const Synthesizer s(kMedium, g);
  CHECK(s.draw(42, 3).values == a.values);
  for (double v : a.values) CHECK(std::isfinite(v));
  CHECK(a.params_hash == kMedium.hash());
}

TEST_CASE("point variance and transverse autocovariance match quadrature") {
  GridSpec g{1, 128, 0.125, 128, 0.125};
  const Synthesizer s(kMedium, g);
  const std::size_t M = 200;
  const int lags[] = {4, 8};
  std::vector<double> var(M), c4(M), c8(M);
  for (std::size_t r = 0; r < M; ++r) {
    const auto st = s.draw(7, r);
    double s0 = 0, s4 = 0, s8 = 0;
    for (int j = 0; j < g.nz; ++j) {
      const auto slab = st.slab(j);
      for (int x = 0; x < g.n; ++x) {
        s0 += slab[x] * slab[x];
        s4 += slab[x] * slab[(x + lags[0]) % g.n];
        s8 += slab[x] * slab[(x + lags[1]) % g.n];
      }
    }
    const double cnt = double(g.nz) * g.n;
    var[r] = s0 / cnt, c4[r] = s4 / cnt, c8[r] = s8 / cnt;
  }
  const auto v = summarize(var);
  const double oracle_var = fidelity::correlation_oracle(kMedium, 0.0);
  CHECK(std::abs(v.mean - oracle_var) < 3 * v.se);
  CHECK(oracle_var == doctest::Approx(total_variance(kMedium)).epsilon(1e-6));
  const auto a4 = summarize(c4);
  const auto a8 = summarize(c8);
  CHECK(std::abs(a4.mean - fidelity::correlation_oracle(kMedium, 0.5)) < 3 * a4.se);
  CHECK(std::abs(a8.mean - fidelity::correlation_oracle(kMedium, 1.0)) < 3 * a8.se);
  // Mean of the Fourier weights is the torus variance.
  double wsum = 0.0;
  for (double w : s.weights()) wsum += w;
  CHECK(wsum == doctest::Approx(oracle_var).epsilon(1e-3));
}

TEST_CASE("homogeneity: per-point variance does not depend on position") {
  GridSpec g{1, 64, 0.25, 64, 0.25};
  const Synthesizer s(kMedium, g);
  std::vector<double> diff(300);
  for (std::size_t r = 0; r < diff.size(); ++r) {
    const auto st = s.draw(9, r);
    double a = 0, b = 0;
    for (int j = 0; j < g.nz; ++j) {
      a += std::pow(st.slab(j)[0], 2);
      b += std::pow(st.slab(j)[21], 2);
    }
    diff[r] = (a - b) / g.nz;
  }
  const auto d = summarize(diff);
  CHECK(std::abs(d.mean) < 3 * d.se);
}

TEST_CASE("isotropy of the transverse plane for dim_t = 2") {
  GridSpec g{2, 32, 0.25, 16, 0.25};
  const Synthesizer s(kMedium, g);
  // Lags (5, 0) and (3, 4) have the same length.
  std::vector<double> diff(150);
  for (std::size_t r = 0; r < diff.size(); ++r) {
    const auto st = s.draw(13, r);
    double a = 0, b = 0;
    for (int j = 0; j < g.nz; ++j) {
      const auto sl = st.slab(j);
      for (int x = 0; x < g.n; ++x) {
        for (int y = 0; y < g.n; ++y) {
          const double v = sl[x * g.n + y];
          a += v * sl[((x + 5) % g.n) * g.n + y];
          b += v * sl[((x + 3) % g.n) * g.n + (y + 4) % g.n];
        }
      }
    }
    diff[r] = (a - b) / (double(g.nz) * g.points());
  }
  const auto d = summarize(diff);
  CHECK(std::abs(d.mean) < 3 * d.se);
}

TEST_CASE("spectral fidelity and longitudinal decorrelation on a small ensemble") {
  GridSpec g{1, 64, 0.25, 64, 0.25};
  const Synthesizer s(kMedium, g);
  for (const auto& b : fidelity::band_ratios(kMedium, s, 100, 21)) {
    CHECK(b.modes > 0);
    CHECK(b.ratio >= 0.9);
    CHECK(b.ratio <= 1.1);
  }
  for (const auto& e : fidelity::longitudinal_ratios(kMedium, s, 100, 22, {2, 4})) {
    CHECK(std::abs(e.empirical - e.expected) < 3 * e.se);
  }
}

TEST_CASE("rescaled slab lookup") {
  GridSpec g{1, 16, 0.5, 64, 0.25};
  const auto st = synth_volume(kMedium, g, 1);
  const auto same = rescaled_slab(st, 0.25 * 5 + 0.125, 1.0);
  const auto s5 = st.slab(5);
  CHECK(std::equal(same.begin(), same.end(), s5.begin()));
  // eps = 1/2: z = 1.3 reads slab floor(1.3 * 4 / 0.25) = 20, amplitude doubled.
  const auto half = rescaled_slab(st, 1.3, 0.5);
  const auto s20 = st.slab(20);
  for (int x = 0; x < g.n; ++x) CHECK(half[x] == 2.0 * s20[x]);
  CHECK(slab_index(st, 0.0) == 0);
  CHECK(slab_index(st, 15.99) == 63);
  CHECK_THROWS_AS(slab_index(st, 16.0), ConfigError);
  CHECK_THROWS_AS(slab_index(st, -1e-9), ConfigError);
  CHECK_THROWS_AS(rescaled_slab(st, 1.0, 0.1), ConfigError);
  CHECK_THROWS_AS(rescaled_slab(st, 1.0, 0.0), ConfigError);
}

TEST_CASE("rescaled variance is the slab variance over eps^2") {
  GridSpec g{1, 32, 0.25, 64, 0.25};
  const Synthesizer s(kMedium, g);
  double a = 0, b = 0;
  for (std::size_t r = 0; r < 200; ++r) {
    const auto st = s.draw(5, r);
    for (double v : rescaled_slab(st, 0.5, 0.25)) a += v * v;
    for (double v : st.slab(slab_index(st, 0.5 / 0.0625))) b += v * v;
  }
  CHECK(a == doctest::Approx(b / 0.0625).epsilon(1e-12));
}

TEST_CASE("quasi-Gaussian ratio") {
  GridSpec g{1, 16, 0.25, 16, 0.25};
  std::vector<ScreenStack> stacks;
  const Synthesizer s(kMedium, g);
  for (std::size_t r = 0; r < 500; ++r) stacks.push_back(s.draw(31, r));
  const auto rep = quasi_gaussian_check(stacks);
  CHECK(rep.realizations == 500);
  CHECK(std::abs(rep.ratio - 3.0) < 3 * rep.se);

  std::vector<ScreenStack> flat(500, zero_stack(g));
  for (auto& f : flat) std::fill(f.values.begin(), f.values.end(), 0.7);
  CHECK(quasi_gaussian_check(flat).ratio == doctest::Approx(1.0));

  CHECK_THROWS_AS(quasi_gaussian_check(std::span(stacks).first(499)), ConfigError);

  for (double eta : {0.5, 1.0, 2.0}) {
    for (double rho : {4.0, 6.0, 8.0}) {
      const auto p = SpectrumParams::bounded_power_law(1.0, 1.0 / 3.0, eta, rho);
      GridSpec gs{1, 16, 0.3, 16, 0.3};
      const Synthesizer sy(p, gs);
      std::vector<ScreenStack> ens;
      for (std::size_t r = 0; r < 500; ++r) ens.push_back(sy.draw(77, r));
      const auto q = quasi_gaussian_check(ens);
      CHECK(std::abs(q.ratio - 3.0) < 3 * q.se);
    }
  }
}

TEST_CASE("binary dump round trip") {
  GridSpec g{2, 8, 0.5, 4, 0.25};
  auto st = synth_volume(kMedium, g, 99, 2);
  st.z0 = 1.5;
  std::stringstream ss;
  write_stack(ss, st);
  const auto back = read_stack(ss);
  CHECK(back.grid.dim_t == 2);
  CHECK(back.grid.n == 8);
  CHECK(back.grid.dz == 0.25);
  CHECK(back.z0 == 1.5);
  CHECK(back.seed == 99);
  CHECK(back.realization == 2);
  CHECK(back.params_hash == st.params_hash);
  REQUIRE(back.values.size() == st.values.size());
  for (std::size_t i = 0; i < st.values.size(); ++i) CHECK(back.values[i] == double(float(st.values[i])));

  std::stringstream bad("NOTASTACK");
  CHECK_THROWS_AS(read_stack(bad), ConfigError);
}

TEST_CASE("synthesis rejects unresolved or divergent media") {
  GridSpec g{1, 16, 0.25, 8, 0.25};
  CHECK_THROWS_AS(synth_volume(SpectrumParams::bounded_power_law(1.0, 0.3, 0.0), g, 1), ConfigError);
  GridSpec coarse{1, 16, 2.0, 8, 0.25};
  CHECK_THROWS_AS(synth_volume(SpectrumParams::bounded_power_law(1.0, 0.3, 0.1, 8.0), coarse, 1), ConfigError);
  CHECK_FALSE(resolution_warnings(coarse, SpectrumParams::bounded_power_law(1.0, 0.3, 0.1, 8.0)).empty());
  const auto z = zero_stack(g);
  CHECK(z.values.size() == 16 * 8);
  CHECK(z.extent() == 2.0);
}

}  // TEST_SUITE
