#include <cmath>
#include <sstream>

#include "beamwave/error.hpp"
#include "beamwave/harness.hpp"
#include "beamwave/moments.hpp"
#include "doctest.h"

using namespace beamwave;

namespace {

// Desk physics on a smaller grid so each ensemble takes well under a second.
RunConfig small_config(double eps = 0.4) {
  RunConfig c = RunConfig::desk();
  c.sim.grid.n = 128;
  c.sim.grid.dx = 0.2;
  c.sim.eps = eps;
  c.sim.checkpoints = {0.25, 1.0};
  c.workers = 1;
  return c;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("merging split ensembles reproduces the single run exactly") {
  const auto c = small_config();
  for (auto model : {Model::Parabolic, Model::WhiteNoise}) {
    const auto whole = run_ensemble(c, model, 4, 11);
    auto a = run_ensemble(c, model, 2, 11, 0).stats;
    const auto b = run_ensemble(c, model, 2, 11, 2).stats;
    a.merge(b);
    CHECK(a == whole.stats);
    // Merging in the other order gives the same bits.
    auto b2 = b;
    b2.merge(run_ensemble(c, model, 2, 11, 0).stats);
    CHECK(b2 == whole.stats);
  }
}

TEST_CASE("results do not depend on the number of workers") {
  auto c = small_config();
  const auto one = run_ensemble(c, Model::WhiteNoise, 6, 3, 0, true);
  c.workers = 3;
  const auto three = run_ensemble(c, Model::WhiteNoise, 6, 3, 0, true);
  CHECK(one.stats == three.stats);
  CHECK(one.ndjson == three.ndjson);
  CHECK(one.ndjson.size() == 6 * 2 * c.thetas.size());
  CHECK(one.ndjson.front().find("\"type\":\"observable\"") != std::string::npos);
}

TEST_CASE("negligible medium gives deterministic observables") {
  auto c = small_config();
  c.sim.spectrum.amplitude = 1e-30;
  for (auto model : {Model::Parabolic, Model::WhiteNoise}) {
    const auto out = run_ensemble(c, model, 5, 4);
    for (std::size_t cp = 0; cp < 2; ++cp) {
      // Accumulators round to 2^-60, so the variance of O(1) values floors near 1e-16.
      for (std::size_t t = 0; t < c.thetas.size(); ++t) {
        CHECK(out.stats.var_re(cp, t) < 1e-12);
        CHECK(out.stats.var_im(cp, t) < 1e-12);
      }
      CHECK(out.stats.mean_norm(cp) == doctest::Approx(out.stats.mean_norm(0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("white-noise ensemble mean follows the damped free flow") {
  auto c = small_config();
  c.mean_field = true;
  const std::size_t M = 400;
  const auto out = run_ensemble(c, Model::WhiteNoise, M, 5);
  const auto kernel = run_kernel(c);
  const auto f0 = initial_field(c.sim);
  const auto thetas = c.test_functions();
  for (std::size_t cp = 0; cp < 2; ++cp) {
    const auto exact = mean_field_exact(f0, c.sim.checkpoints[cp], c.sim.k_tilde, kernel->grid_gamma0());
    for (std::size_t t = 0; t < thetas.size(); ++t) {
      const auto want = observe(exact, thetas[t]);
      const auto got = out.stats.mean(cp, t);
      CHECK(std::abs(got.real() - want.real()) < 3 * std::sqrt(out.stats.var_re(cp, t) / M));
      CHECK(std::abs(got.imag() - want.imag()) < 3 * std::sqrt(out.stats.var_im(cp, t) / M));
    }
    // The pointwise mean field is kept when requested.
    CHECK(out.stats.mean_field(cp).size() == c.sim.grid.points());
  }
}

TEST_CASE("white-noise variance matches the quadratic-variation prediction") {
  auto c = small_config();
  c.wn_dz = 0.002;
  const double h = c.sim.checkpoints.front();
  const std::size_t M = 500;
  const auto out = run_ensemble(c, Model::WhiteNoise, M, 8);
  const auto re = out.stats.samples(0, 0, false);

  // Same seeds and indices reproduce the ensemble paths, now with the probe attached.
  const auto kernel = run_kernel(c);
  WnConfig wn;
  wn.kernel = kernel;
  wn.dz = c.wn_dz;
  wn.z_final = c.sim.z_final;
  wn.checkpoints = c.sim.checkpoints;
  const auto f0 = initial_field(c.sim);
  const auto theta = c.test_functions().front();
  const double damp = std::exp(-2 * c.sim.k_tilde * c.sim.k_tilde * kernel->grid_gamma0() * h);
  double mean = 0.0;
  for (double v : re) mean += v / M;
  std::vector<double> d(M);
  for (std::size_t r = 0; r < M; ++r) {
    const auto path = wn_propagate(wn, f0, {}, 8, r, {.qv_theta = &theta, .qv_horizon = h}).qv[0];
    // Var Re M = (E|M|^2 + Re E M^2) / 2 for a centered martingale M.
    const double predicted = damp * 0.5 * (path.predicted_abs + path.predicted.real());
    d[r] = (re[r] - mean) * (re[r] - mean) * M / (M - 1.0) - predicted;
  }
  double dm = 0.0, dv = 0.0;
  for (double x : d) dm += x / M;
  for (double x : d) dv += (x - dm) * (x - dm) / (M - 1.0);
  CHECK(std::abs(dm) < 3 * std::sqrt(dv / M));
  CHECK(out.stats.var_re(0, 0) > 0.0);
}

TEST_CASE("distance between two samples of one law sits at the noise floor") {
  const auto c = small_config();
  const auto a = run_ensemble(c, Model::WhiteNoise, 300, 21).stats;
  const auto b = run_ensemble(c, Model::WhiteNoise, 300, 22).stats;
  const auto d = ensemble_distance(a, b, c.thetas);
  CHECK(d.distance > 0.0);
  CHECK(std::abs(d.excess) < 3 * d.se);
  CHECK(d.components.size() == 2 * c.thetas.size() * 2);
  const auto self = ensemble_distance(a, a, c.thetas);
  CHECK(self.distance == doctest::Approx(0.0).epsilon(1e-14));

  auto other = small_config();
  other.thetas.pop_back();
  const auto fewer = run_ensemble(other, Model::WhiteNoise, 3, 1).stats;
  CHECK_THROWS_WITH_AS(ensemble_distance(fewer, b, c.thetas), doctest::Contains("different observable layouts"),
                       ConfigError);
}

TEST_CASE("configuration errors are reported before any work") {
  const auto c = small_config();
  CHECK_THROWS_WITH_AS(converge_study(c, {0.2, 0.4}, 10, 1), doctest::Contains("strictly decreasing"), ConfigError);
  CHECK_THROWS_AS(converge_study(c, {0.4, 0.4}, 10, 1), ConfigError);
  CHECK_THROWS_AS(converge_study(c, {}, 10, 1), ConfigError);
  CHECK_THROWS_AS(converge_study(c, {0.4}, 1, 1), ConfigError);
  CHECK_THROWS_AS(run_ensemble(c, Model::Parabolic, 0, 1), ConfigError);

  auto fixed = c;
  fixed.auto_nz = false;
  fixed.sim.grid.nz = 16;
  CHECK_THROWS_WITH_AS(run_ensemble(fixed, Model::Parabolic, 1, 1), doctest::Contains("needs nz >= 128"), ConfigError);
  CHECK(required_nz(c, 0.4) == 128);
  CHECK(required_nz(c, 0.1) == 512);
  const auto sized = configure_for_eps(c, 0.1);
  CHECK(sized.sim.grid.nz == 512);
  CHECK(sized.sim.dz_solver == doctest::Approx(0.0025));
  CHECK_THROWS_AS(configure_for_eps(c, 0.0), ConfigError);

  auto bad = c;
  bad.thetas.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(model_from_string("schrodinger"), ConfigError);
  CHECK(model_from_string(to_string(Model::WhiteNoise)) == Model::WhiteNoise);
}

TEST_CASE("scale-limit study: gaps shrink and the pinned kernel polarizes") {
  ScaleLimitRequest req;
  req.base = SpectrumParams::bounded_power_law(1.0, 1.0 / 3.0, 1.0, 16.0);
  req.etas = {1.0};
  req.rhos = {16.0, 64.0, kInf};
  req.radii = {0.5, 1.0, 2.0};
  req.pinned_limit = true;
  const auto rep = scale_limit_study(req);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[1].gap_rho < rep.rows[0].gap_rho);
  CHECK(rep.rows[2].gap_rho == 0.0);
  CHECK(std::isnan(rep.rows[0].gap_pinned));
  CHECK(std::isfinite(rep.rows[2].gap_pinned));
  CHECK(rep.polarization_residual < 1e-6);
  CHECK(rep.rows[0].mean_field_factor == doctest::Approx(std::exp(-rep.rows[0].gamma0)));

  // The pinned gap shrinks as eta -> 0.
  req.etas = {1.0, 0.25};
  req.rhos = {kInf};
  const auto eta = scale_limit_study(req);
  CHECK(eta.rows[1].gap_pinned < eta.rows[0].gap_pinned);

  req.base.H = 0.5;
  CHECK_THROWS_WITH_AS(scale_limit_study(req), doctest::Contains("convergent only if H<1/2"), DivergenceError);
  req.base.H = 1.0 / 3.0;
  req.etas = {0.0};
  CHECK_THROWS_AS(scale_limit_study(req), ConfigError);
}

TEST_CASE("config JSON round trip and strict keys") {
  auto c = small_config();
  c.sim.spectrum.rho = kInf;
  c.mean_field = true;
  const auto text = config_to_json(c);
  const auto back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(std::isinf(back.sim.spectrum.rho));
  CHECK(back.thetas.size() == c.thetas.size());

  CHECK_THROWS_WITH_AS(config_from_json(R"({"k_tilde": 1, "colour": 2})"), doctest::Contains("unknown key 'colour'"),
                       ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"grid": {"n": 64, "nx": 3}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"eps": "small"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{"), ConfigError);
  CHECK(fnv1a("") == 1469598103934665603ULL);

  const auto header = ndjson_header(c, Model::Parabolic, 9);
  CHECK(header.find("\"config_hash\"") != std::string::npos);
  CHECK(header.find("\"timestamp\"") != std::string::npos);
}

TEST_CASE("CSV writers emit their headers") {
  const auto c = small_config();
  const auto out = run_ensemble(c, Model::WhiteNoise, 2, 1);
  std::ostringstream s1, s2, s3;
  write_summary_csv(s1, out.stats, c.thetas);
  CHECK(first_line(s1.str()) == "z,theta,mean_re,mean_im,var_re,var_im,se_re,se_im,mean_width,scintillation");
  ConvergenceReport rep;
  rep.entries.push_back({});
  write_convergence_csv(s2, rep);
  CHECK(first_line(s2.str()) == "eps,distance,floor,excess,se,sup_theta_v");
  write_scale_limit_csv(s3, ScaleLimitReport{});
  CHECK(first_line(s3.str()) == "eta,rho,gamma0,gap_rho,gap_pinned,mean_field_factor");
}

}  // TEST_SUITE
