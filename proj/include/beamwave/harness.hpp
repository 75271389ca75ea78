#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "beamwave/covariance.hpp"
#include "beamwave/parabolic.hpp"
#include "beamwave/stats.hpp"
#include "beamwave/whitenoise.hpp"

namespace beamwave {

enum class Model { Parabolic, WhiteNoise };
std::string to_string(Model m);
Model model_from_string(const std::string& name);

struct ThetaSpec {
  std::string name;
  std::array<double, 2> center{0.0, 0.0};
  double width = 1.0;
};

/// Shared configuration for both models. sim.grid.nz and sim.grid.dz
/// describe the screen stack; with auto_nz the slab count is derived from
/// z_final / eps^2 plus a decorrelation pad.
struct RunConfig {
  SimConfig sim;
  bool auto_nz = true;
  double wn_dz = 0.01;
  std::vector<ThetaSpec> thetas;
  bool mean_field = false;
  /// 0 picks the hardware concurrency.
  unsigned workers = 0;

  /// dim_t = 1, n = 512, k = 1, gamma = 1, H = 1/3, eta = 1, rho = 8, K = 0.5,
  /// z_final = 1, checkpoints {1/8, 1/4, 1}, a centered and a shifted Gaussian theta.
  static RunConfig desk();
  void validate() const;
  std::vector<TestFunction> test_functions() const;
};

/// Slabs needed to cover z_final / eps^2 plus 16 / eta, rounded up to a power of two.
int required_nz(const RunConfig& config, double eps);
/// Copy of config with the stack sized for eps and dz_solver capped at one compressed slab.
RunConfig configure_for_eps(const RunConfig& config, double eps);
/// Kernel for the white-noise model on the run grid (pinned when eta = 0).
std::shared_ptr<const CovarianceKernel> run_kernel(const RunConfig& config);

struct RunOutput {
  EnsembleStats stats;
  /// One NDJSON line per (realization, checkpoint, theta), realization order.
  std::vector<std::string> ndjson;
};

/// Realization i uses the counter streams (seed, i); the result does not
/// depend on worker count or scheduling.
RunOutput run_ensemble(const RunConfig& config, Model model, std::size_t realizations, std::uint64_t seed,
                       std::uint64_t first_index = 0, bool ndjson = false);

struct ComponentDistance {
  double z = 0.0;
  std::string theta;
  std::string part;
  double energy = 0.0;
  double floor = 0.0;
  double delta_mean = 0.0;
  double se_mean = 0.0;
  double delta_var = 0.0;
  double se_var = 0.0;
};

struct DistanceEntry {
  double eps = 0.0;
  /// Sum of componentwise energy distances.
  double distance = 0.0;
  /// Expected distance between two samples of one law at these sizes.
  double floor = 0.0;
  double excess = 0.0;
  /// Delete-group jackknife standard error of the distance.
  double se = 0.0;
  /// Largest ||theta V(z / eps^2) / eps||_2 over the slabs of the first realization.
  double sup_theta_v = 0.0;
  std::vector<ComponentDistance> components;
};

struct ConvergenceReport {
  std::vector<double> eps_list;
  std::size_t realizations = 0;
  std::vector<DistanceEntry> entries;
  bool monotone = false;
};

/// Distance between the observable laws of two ensembles with matching layout.
DistanceEntry ensemble_distance(const EnsembleStats& a, const EnsembleStats& reference,
                                const std::vector<ThetaSpec>& thetas, int jackknife_groups = 20);

ConvergenceReport converge_study(const RunConfig& base, const std::vector<double>& eps_list, std::size_t realizations,
                                 std::uint64_t seed);

struct ScaleLimitRequest {
  SpectrumParams base;
  std::vector<double> etas;
  std::vector<double> rhos;
  std::vector<double> radii{0.25, 0.5, 1.0, 2.0, 4.0};
  double k_tilde = 1.0;
  double z = 1.0;
  /// Compare eta > 0 structure functions with the origin-pinned limit (needs H < 1/2).
  bool pinned_limit = false;
};

struct ScaleLimitRow {
  double eta = 0.0;
  double rho = 0.0;
  double gamma0 = 0.0;
  /// max_r |Gamma(r; rho) - Gamma(r; rho = inf)| at this eta (0 when rho = inf).
  double gap_rho = 0.0;
  /// max_r |D(r; eta) - D_pinned(r)| (NaN when not requested).
  double gap_pinned = 0.0;
  /// Mean-field amplitude factor exp(-k^2 Gamma0 z).
  double mean_field_factor = 0.0;
};

struct ScaleLimitReport {
  std::vector<ScaleLimitRow> rows;
  /// Largest |Gamma'(x, y) - (D(|x|) + D(|y|) - D(|x-y|)) / 2| over sample pairs.
  double polarization_residual = 0.0;
};

ScaleLimitReport scale_limit_study(const ScaleLimitRequest& request);

/// Canonical JSON (sorted keys) and its FNV-1a hash.
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);
std::uint64_t config_hash(const RunConfig& config);
std::uint64_t fnv1a(const std::string& text);

/// Header record holding the wall-clock timestamp and config hash.
std::string ndjson_header(const RunConfig& config, Model model, std::uint64_t seed);
void write_summary_csv(std::ostream& os, const EnsembleStats& stats, const std::vector<ThetaSpec>& thetas);
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);
void write_scale_limit_csv(std::ostream& os, const ScaleLimitReport& report);

}  // namespace beamwave
