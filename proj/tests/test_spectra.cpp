#include <cmath>
#include <random>

#include "beamwave/error.hpp"
#include "beamwave/spectra.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace beamwave;

namespace {

SpectrumParams kolmogorov(double eta = 1.0, double rho = kInf) {
  return SpectrumParams::bounded_power_law(1.0, 1.0 / 3.0, eta, rho);
}

// Nested Cartesian quadrature over (xi, |p|) with p = u / (1 - u) mapping on
// both axes; f receives (xi, p) and already includes the 2 pi p area factor.
double nested_3d(const SpectrumParams& params, const std::function<double(double, double)>& f) {
  auto mapped = [](const oracle::Fn& g) {
    return [g](double u) {
      const double s = u / (1.0 - u);
      return g(s) / ((1.0 - u) * (1.0 - u));
    };
  };
  const oracle::Fn outer = [&](double xi) {
    const oracle::Fn inner = [&](double p) { return f(xi, p) * eval_radial(params, std::hypot(xi, p)); };
    return oracle::panels(mapped(inner), 0.0, 1.0, 1.0 / 400.0);
  };
  return 2.0 * oracle::panels(mapped(outer), 0.0, 1.0, 1.0 / 400.0);
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("closed-form values") {
  const auto p = kolmogorov();
  CHECK(eval_spectrum(p, {0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_spectrum(p, {0, 1, 0}) == doctest::Approx(std::pow(2.0, -11.0 / 6.0)).epsilon(1e-14));
  CHECK(eval_spectrum(p, {0, 1, 0}) == doctest::Approx(0.28062).epsilon(1e-5));
  CHECK(eval_transverse(p, {0, 0}) == doctest::Approx(1.0));

  const auto pinned = kolmogorov(0.0);
  CHECK(eval_transverse(pinned, {2, 0}) == doctest::Approx(std::pow(2.0, -11.0 / 3.0)).epsilon(1e-14));
  CHECK(eval_transverse(pinned, {2, 0}) == doctest::Approx(0.07874).epsilon(1e-4));

  const double L0 = 10.0;
  const double eta = 2 * M_PI / L0;
  const auto vk = SpectrumParams::von_karman(0.033, eta, 50.0);
  CHECK(eval_spectrum(vk, {0, 0, 0}) == doctest::Approx(0.033 * std::pow(eta, -11.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("transverse slice equals the xi = 0 spectrum") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-20, 20);
  for (const auto& p : {kolmogorov(), kolmogorov(0.5, 8.0), SpectrumParams::hill(1.0, 0.3, 4.0)}) {
    for (int i = 0; i < 50; ++i) {
      const std::array<double, 2> q{u(gen), u(gen)};
      CHECK(eval_transverse(p, q) == eval_spectrum(p, {0.0, q[0], q[1]}));
    }
  }
}

TEST_CASE("nonnegative and isotropic over random sweeps") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> logk(-3, 3);
  std::uniform_real_distribution<double> hdist(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const double eta = std::pow(10.0, logk(gen) / 3);
    const double rho = eta * std::pow(10.0, 1 + std::abs(logk(gen)));
    const SpectrumParams ps[] = {SpectrumParams::bounded_power_law(2.0, hdist(gen), eta, rho),
                                 SpectrumParams::von_karman(0.1, eta, rho), SpectrumParams::hill(0.1, eta, rho)};
    std::array<double, 3> k{u(gen), u(gen), u(gen)};
    const double scale = std::pow(10.0, logk(gen));
    for (double& c : k) c *= scale;
    // Random rotation from a normalized quaternion.
    std::normal_distribution<double> n;
    double q[4] = {n(gen), n(gen), n(gen), n(gen)};
    const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (double& c : q) c /= qn;
    const double a = q[0], b = q[1], c = q[2], d = q[3];
    const double R[3][3] = {{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
                            {2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)},
                            {2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d}};
    std::array<double, 3> kr{};
    for (int i = 0; i < 3; ++i) kr[i] = R[i][0] * k[0] + R[i][1] * k[1] + R[i][2] * k[2];
    for (const auto& p : ps) {
      const double v = eval_spectrum(p, k);
      CHECK(v >= 0.0);
      CHECK(eval_spectrum(p, kr) == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("monotone decay for the power-law and von Karman variants") {
  for (const auto& p : {kolmogorov(0.3, 20.0), SpectrumParams::von_karman(1.0, 0.3, 20.0),
                        SpectrumParams::bounded_power_law(1.0, 0.8, 0.0, 5.0 + 1e-9)}) {
    double prev = kInf;
    for (double k = 1e-3; k < 1e3; k *= 1.05) {
      const double v = eval_radial(p, k);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("von Karman inertial-range slope is -11/3") {
  const auto p = SpectrumParams::von_karman(1.0, 1e-3, 1e3);
  const double k1 = 0.1, k2 = 1.0;
  const double slope = std::log(eval_radial(p, k2) / eval_radial(p, k1)) / std::log(k2 / k1);
  CHECK(std::abs(slope + 11.0 / 3.0) < 0.02);
}

TEST_CASE("Hill bracket is clamped and flagged") {
  const auto p = SpectrumParams::hill(1.0, 0.1, 1.0);
  const auto inside = eval_radial_checked(p, 1.0);
  CHECK_FALSE(inside.clamped);
  CHECK(inside.value > 0.0);
  // 1 + 1.802 s - 0.254 s^(7/6) turns negative near s ~ 3e5.
  const auto far = eval_radial_checked(p, 3.3 * 1e6);
  CHECK(far.clamped);
  CHECK(far.value == 0.0);
}

TEST_CASE("non-finite wavevectors and invalid parameters are rejected") {
  const auto p = kolmogorov();
  CHECK_THROWS_AS(eval_spectrum(p, {NAN, 0, 0}), ConfigError);
  CHECK_THROWS_AS(eval_spectrum(p, {0, INFINITY, 0}), ConfigError);
  CHECK_THROWS_AS(SpectrumParams::bounded_power_law(1.0, 1.2, 1.0), ConfigError);
  CHECK_THROWS_AS(SpectrumParams::bounded_power_law(-1.0, 0.3, 1.0), ConfigError);
  CHECK_THROWS_AS(SpectrumParams::bounded_power_law(1.0, 0.3, 2.0, 1.0), ConfigError);
  CHECK(variant_from_string(to_string(SpectrumVariant::Hill)) == SpectrumVariant::Hill);
  CHECK_THROWS_AS(variant_from_string("gaussian"), ConfigError);
}

TEST_CASE("laplacian moment against a nested 3D oracle") {
  const auto p10 = kolmogorov(1.0, 10.0);
  const auto p20 = kolmogorov(1.0, 20.0);
  const auto p4 = [](double, double p) { return 2 * M_PI * std::pow(p, 5); };
  const double o10 = nested_3d(p10, p4);
  const double o20 = nested_3d(p20, p4);
  CHECK(laplacian_moment(p10) == doctest::Approx(o10).epsilon(2e-3));
  CHECK(laplacian_moment(p20) == doctest::Approx(o20).epsilon(2e-3));
  const double ratio = laplacian_moment(p20) / laplacian_moment(p10);
  CHECK(ratio == doctest::Approx(std::pow(2.0, 10.0 / 3.0)).epsilon(0.05));

  CHECK_THROWS_AS(laplacian_moment(kolmogorov()), DivergenceError);
  const auto twice = SpectrumParams::bounded_power_law(2.0, 1.0 / 3.0, 1.0, 10.0);
  CHECK(laplacian_moment(twice) == doctest::Approx(2.0 * laplacian_moment(p10)).epsilon(1e-12));
}

TEST_CASE("laplacian moment grows like rho^(4-2H)") {
  for (double H : {0.2, 1.0 / 3.0, 0.7}) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double rhos[] = {8, 16, 32, 64};
    for (double rho : rhos) {
      const double x = std::log(rho);
      const double y = std::log(laplacian_moment(SpectrumParams::bounded_power_law(1.0, H, 1.0, rho)));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double slope = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
    CHECK(std::abs(slope - (4 - 2 * H)) < 0.1);
  }
}

TEST_CASE("longitudinal correlation") {
  const auto p = kolmogorov(1.0, 10.0);
  const double r0 = longitudinal_corr(p, 0.0);
  CHECK(r0 == doctest::Approx(total_variance(p)).epsilon(1e-14));
  const double oracle_var = nested_3d(p, [](double, double q) { return 2 * M_PI * q; });
  CHECK(r0 == doctest::Approx(oracle_var).epsilon(1e-5));
  CHECK(longitudinal_corr(p, 0.7) < r0);
  CHECK(std::abs(longitudinal_corr(p, 60.0)) < 1e-6 * r0);
  CHECK(longitudinal_corr(p, -0.7) == longitudinal_corr(p, 0.7));

  // The R(t) integral over t >= 0 equals pi times the xi = 0 slice integral.
  const double slice = 2 * M_PI * oracle::radial([&](double q) { return q * eval_radial(p, q); }, 4000.0, 0.25);
  const double oracle_ci = M_PI * slice / oracle_var;
  const double ci = correlation_integral(p, kInf);
  CHECK(ci == doctest::Approx(oracle_ci).epsilon(1e-4));
  CHECK(correlation_integral(p, 40.0) == doctest::Approx(ci).epsilon(1e-4));
  CHECK(correlation_integral(p, 1.0) < correlation_integral(p, 2.0));

  CHECK_THROWS_AS(longitudinal_corr(kolmogorov(0.0), 1.0), DivergenceError);
}

TEST_CASE("planar marginal table matches direct quadrature") {
  const auto p = kolmogorov(1.0, 8.0);
  const PlanarMarginal table(p, 0.05, 200.0);
  for (double s : {0.0, 0.07, 0.33, 1.0, 2.7, 9.1, 55.0, 180.0}) {
    CHECK(table(s) == doctest::Approx(PlanarMarginal::direct(p, s)).epsilon(1e-7));
  }
  // Oracle: integrate Phi(sqrt(s^2 + q^2)) over q directly.
  const double s = 1.3;
  const double o = 2 * oracle::radial([&](double q) { return eval_radial(p, std::hypot(s, q)); }, 4000.0, 0.25, 1e-14);
  CHECK(table(s) == doctest::Approx(o).epsilon(1e-7));
}

}  // TEST_SUITE
