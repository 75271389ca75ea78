#include "beamwave/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "beamwave/error.hpp"
#include "beamwave/synth.hpp"
#include "json.hpp"

namespace beamwave {

using nlohmann::json;

namespace {

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(1, jobs)));
}

RealizationRecord to_record(const Trajectory& traj) {
  RealizationRecord r;
  r.checkpoints = traj.records;
  for (const auto& f : traj.fields) r.axis_intensity.push_back(std::norm(f.values[f.grid.origin_index()]));
  return r;
}

std::string observable_line(Model model, std::uint64_t realization, double eps, const CheckpointRecord& c,
                            std::size_t t, const std::string& theta) {
  json j;
  j["type"] = "observable";
  j["model"] = to_string(model);
  j["realization"] = realization;
  j["eps"] = eps;
  j["z"] = c.z;
  j["theta"] = theta;
  j["re"] = c.obs[t].real();
  j["im"] = c.obs[t].imag();
  j["norm"] = c.norm;
  j["width"] = c.width;
  j["peak_intensity"] = c.peak_intensity;
  return j.dump();
}

json rho_to_json(double rho) { return std::isfinite(rho) ? json(rho) : json("inf"); }

double rho_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ConfigError("rho must be a number or \"inf\"");
  }
  return j.get<double>();
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

double fourth_moment_se(std::span<const double> x) {
  const double m = mean_of(x);
  const double v = variance_of(x);
  double m4 = 0.0;
  for (double s : x) m4 += std::pow(s - m, 4);
  m4 /= static_cast<double>(x.size());
  return std::max(0.0, (m4 - v * v) / static_cast<double>(x.size()));
}

}  // namespace

std::string to_string(Model m) { return m == Model::Parabolic ? "parabolic" : "wn"; }

Model model_from_string(const std::string& name) {
  if (name == "parabolic") return Model::Parabolic;
  if (name == "wn") return Model::WhiteNoise;
  throw ConfigError("unknown model '" + name + "' (expected parabolic or wn)");
}

RunConfig RunConfig::desk() {
  RunConfig c;
  c.sim.k_tilde = 1.0;
  c.sim.eps = 0.1;
  c.sim.gamma = 1.0;
  c.sim.width = 1.0;
  c.sim.spectrum = SpectrumParams::bounded_power_law(0.5, 1.0 / 3.0, 1.0, 8.0);
  c.sim.grid = GridSpec{1, 512, 0.1, 1, 0.25};
  c.sim.z_final = 1.0;
  c.sim.dz_solver = 0.01;
  c.sim.checkpoints = {0.125, 0.25, 1.0};
  c.wn_dz = 0.01;
  c.thetas = {{"centered", {0.0, 0.0}, 1.0}, {"shifted", {1.5, 0.0}, 1.0}};
  return c;
}

void RunConfig::validate() const {
  if (thetas.empty()) throw ConfigError("at least one test function is required");
  if (!(wn_dz > 0.0)) throw ConfigError("wn_dz must be positive");
  const RunConfig sized = configure_for_eps(*this, sim.eps);
  sized.sim.validate();
  for (const auto& t : test_functions()) check_test_function(sim.grid, t);
}

std::vector<TestFunction> RunConfig::test_functions() const {
  std::vector<TestFunction> out;
  for (const auto& t : thetas) out.push_back(gaussian_test(sim.grid, t.center, t.width, t.name));
  return out;
}

int required_nz(const RunConfig& config, double eps) {
  const double pad = config.sim.spectrum.eta > 0.0 ? 16.0 / config.sim.spectrum.eta : 0.0;
  const double t = config.sim.z_final / (eps * eps) + pad;
  const auto need = static_cast<long>(std::ceil(t / config.sim.grid.dz));
  long nz = 1;
  while (nz < need) nz *= 2;
  if (nz > (1L << 24)) throw ConfigError("screen stack would need more than 2^24 slabs");
  return static_cast<int>(nz);
}

RunConfig configure_for_eps(const RunConfig& config, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
  RunConfig c = config;
  c.sim.eps = eps;
  const int need = required_nz(config, eps);
  if (config.auto_nz) {
    c.sim.grid.nz = need;
  } else if (config.sim.grid.nz < need) {
    std::ostringstream os;
    os << "screen stack under-resolved for eps = " << eps << ": needs nz >= " << need << ", have "
       << config.sim.grid.nz;
    throw ConfigError(os.str());
  }
  c.sim.dz_solver = std::min(config.sim.dz_solver, config.sim.grid.dz * eps * eps);
  return c;
}

std::shared_ptr<const CovarianceKernel> run_kernel(const RunConfig& config) {
  GridSpec g = config.sim.grid;
  g.nz = 1;
  const auto mode = kernel_mode(config.sim.spectrum);
  KernelOptions opt;
  opt.table = mode == KernelMode::OriginPinned;
  opt.matrix = mode == KernelMode::OriginPinned;
  return std::make_shared<const CovarianceKernel>(CovarianceKernel::build(config.sim.spectrum, g, opt));
}

RunOutput run_ensemble(const RunConfig& config, Model model, std::size_t realizations, std::uint64_t seed,
                       std::uint64_t first_index, bool ndjson) {
  if (realizations < 1) throw ConfigError("run_ensemble needs at least one realization");
  const RunConfig cfg = configure_for_eps(config, config.sim.eps);
  cfg.validate();
  const auto thetas = cfg.test_functions();
  const auto cps = cfg.sim.checkpoint_list();
  const std::size_t grid_points = cfg.mean_field ? cfg.sim.grid.points() : 0;

  std::unique_ptr<Synthesizer> synth;
  std::shared_ptr<const CovarianceKernel> kernel;
  WnConfig wn;
  WaveField F0;
  if (model == Model::Parabolic) {
    synth = std::make_unique<Synthesizer>(cfg.sim.spectrum, cfg.sim.grid);
  } else {
    kernel = run_kernel(cfg);
    wn.k_tilde = cfg.sim.k_tilde;
    wn.kernel = kernel;
    wn.dz = cfg.wn_dz;
    wn.z_final = cfg.sim.z_final;
    wn.checkpoints = cps;
    wn.variant = kernel->mode() == KernelMode::OriginPinned ? WnVariant::OriginPinned : WnVariant::Standard;
    F0 = initial_field(cfg.sim);
  }

  const unsigned workers = worker_count(cfg.workers, realizations);
  std::vector<EnsembleStats> partial(workers, EnsembleStats(cps.size(), thetas.size(), grid_points));
  std::vector<std::vector<std::string>> lines(ndjson ? realizations : 0);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::string error_context;

  const auto work = [&](unsigned w) {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= realizations) return;
      const std::uint64_t index = first_index + k;
      try {
        Trajectory traj;
        if (model == Model::Parabolic) {
          const ScreenStack stack = synth->draw(seed, index);
          PropagateOptions opt;
          opt.keep_fields = true;
          traj = propagate(cfg.sim, stack, thetas, opt);
        } else {
          WnOptions opt;
          opt.keep_fields = true;
          traj = wn_propagate(wn, F0, thetas, seed, index, opt).trajectory;
        }
        const auto rec = to_record(traj);
        partial[w].add(index, rec, grid_points ? std::span<const WaveField>(traj.fields) : std::span<const WaveField>());
        if (ndjson) {
          for (const auto& c : rec.checkpoints) {
            for (std::size_t t = 0; t < thetas.size(); ++t) {
              lines[k].push_back(observable_line(model, index, cfg.sim.eps, c, t, thetas[t].name));
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
          error_context = "realization " + std::to_string(index) + " (seed " + std::to_string(seed) + "): ";
        }
        next = realizations;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const InvariantViolation& e) {
      throw InvariantViolation(error_context + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(error_context + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(error_context + e.what());
    }
  }
  RunOutput out;
  out.stats = EnsembleStats(cps.size(), thetas.size(), grid_points);
  for (const auto& p : partial) out.stats.merge(p);
  for (auto& l : lines) {
    for (auto& s : l) out.ndjson.push_back(std::move(s));
  }
  return out;
}

DistanceEntry ensemble_distance(const EnsembleStats& a, const EnsembleStats& reference,
                                const std::vector<ThetaSpec>& thetas, int jackknife_groups) {
  if (a.checkpoints() != reference.checkpoints() || a.thetas() != reference.thetas()) {
    throw ConfigError("ensembles have different observable layouts");
  }
  if (a.count() < 2 || reference.count() < 2) throw ConfigError("distance needs at least two realizations per ensemble");
  DistanceEntry e;
  const auto z = reference.z_values();
  std::vector<std::pair<std::vector<double>, std::vector<double>>> comps;
  for (std::size_t cp = 0; cp < a.checkpoints(); ++cp) {
    for (std::size_t t = 0; t < a.thetas(); ++t) {
      for (bool im : {false, true}) {
        auto x = a.samples(cp, t, im);
        auto y = reference.samples(cp, t, im);
        ComponentDistance c;
        c.z = z.at(cp);
        c.theta = t < thetas.size() ? thetas[t].name : std::to_string(t);
        c.part = im ? "im" : "re";
        c.energy = energy_distance(x, y);
        const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
        c.floor = mean_abs_difference(y) * (1.0 / n + 1.0 / m);
        c.delta_mean = mean_of(x) - mean_of(y);
        c.se_mean = std::sqrt(variance_of(x) / n + variance_of(y) / m);
        c.delta_var = variance_of(x) - variance_of(y);
        c.se_var = std::sqrt(fourth_moment_se(x) + fourth_moment_se(y));
        e.distance += c.energy;
        e.floor += c.floor;
        e.components.push_back(c);
        comps.emplace_back(std::move(x), std::move(y));
      }
    }
  }
  e.excess = e.distance - e.floor;
  const int G = std::max(2, jackknife_groups);
  std::vector<double> dg(G, 0.0);
  for (int g = 0; g < G; ++g) {
    for (const auto& [x, y] : comps) {
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (static_cast<int>(i % G) != g) xs.push_back(x[i]);
      }
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (static_cast<int>(i % G) != g) ys.push_back(y[i]);
      }
      dg[g] += energy_distance(xs, ys);
    }
  }
  const double mean = mean_of(dg);
  double s = 0.0;
  for (double d : dg) s += (d - mean) * (d - mean);
  e.se = std::sqrt((G - 1.0) / G * s);
  return e;
}

ConvergenceReport converge_study(const RunConfig& base, const std::vector<double>& eps_list, std::size_t realizations,
                                 std::uint64_t seed) {
  if (eps_list.empty()) throw ConfigError("eps list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps list must be strictly decreasing");
  }
  if (realizations < 2) throw ConfigError("convergence study needs at least two realizations");
  // Fail fast on every eps before running anything.
  for (double eps : eps_list) configure_for_eps(base, eps).validate();

  ConvergenceReport rep;
  rep.eps_list = eps_list;
  rep.realizations = realizations;
  const auto reference = run_ensemble(configure_for_eps(base, eps_list.front()), Model::WhiteNoise, realizations, seed);
  for (double eps : eps_list) {
    const RunConfig cfg = configure_for_eps(base, eps);
    const auto para = run_ensemble(cfg, Model::Parabolic, realizations, seed);
    DistanceEntry e = ensemble_distance(para.stats, reference.stats, cfg.thetas);
    e.eps = eps;
    const ScreenStack stack = Synthesizer(cfg.sim.spectrum, cfg.sim.grid).draw(seed, 0);
    const auto theta = cfg.test_functions().front();
    const int last = slab_index(stack, cfg.sim.z_final / (eps * eps));
    for (int j = 0; j <= last; ++j) {
      const auto slab = stack.slab(j);
      double s = 0.0;
      for (std::size_t i = 0; i < slab.size(); ++i) s += std::pow(theta.values[i] * slab[i] / eps, 2);
      e.sup_theta_v = std::max(e.sup_theta_v, std::sqrt(s * cfg.sim.grid.cell()));
    }
    rep.entries.push_back(std::move(e));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.entries.size(); ++i) {
    if (!(rep.entries[i].distance < rep.entries[i - 1].distance)) rep.monotone = false;
  }
  return rep;
}

ScaleLimitReport scale_limit_study(const ScaleLimitRequest& request) {
  ScaleLimitReport rep;
  SpectrumParams pinned = request.base;
  pinned.eta = 0.0;
  pinned.rho = kInf;
  if (request.pinned_limit) kernel_mode(pinned);
  for (double eta : request.etas) {
    if (!(eta > 0.0)) throw ConfigError("scale-limit etas must be positive; the eta = 0 limit is the pinned reference");
    SpectrumParams inf = request.base;
    inf.eta = eta;
    inf.rho = kInf;
    for (double rho : request.rhos) {
      SpectrumParams p = inf;
      p.rho = rho;
      ScaleLimitRow row;
      row.eta = eta;
      row.rho = rho;
      row.gamma0 = gamma1_radial(p, 0.0);
      row.gap_pinned = std::nan("");
      for (double r : request.radii) {
        if (std::isfinite(rho)) row.gap_rho = std::max(row.gap_rho, std::abs(gamma1_radial(p, r) - gamma1_radial(inf, r)));
        if (request.pinned_limit && !std::isfinite(rho)) {
          const double gap = std::abs(structure_function(p, r) - gamma_prime_structure(pinned, r));
          row.gap_pinned = std::isnan(row.gap_pinned) ? gap : std::max(row.gap_pinned, gap);
        }
      }
      row.mean_field_factor = std::exp(-request.k_tilde * request.k_tilde * row.gamma0 * request.z);
      rep.rows.push_back(row);
    }
  }
  if (request.pinned_limit) {
    for (double a : request.radii) {
      for (double b : request.radii) {
        const std::array<double, 2> x{a, 0.0};
        const std::array<double, 2> y{b * 0.6, b * 0.8};
        const double c = std::hypot(x[0] - y[0], x[1] - y[1]);
        const double lhs = gamma_prime_cross(pinned, x, y);
        const double rhs = 0.5 * (gamma_prime_structure(pinned, a) + gamma_prime_structure(pinned, b) -
                                  gamma_prime_structure(pinned, c));
        rep.polarization_residual = std::max(rep.polarization_residual, std::abs(lhs - rhs));
      }
    }
  }
  return rep;
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["k_tilde"] = c.sim.k_tilde;
  j["eps"] = c.sim.eps;
  j["gamma"] = c.sim.gamma;
  j["width"] = c.sim.width;
  j["z_final"] = c.sim.z_final;
  j["dz_solver"] = c.sim.dz_solver;
  j["absorber_rate"] = c.sim.absorber_rate;
  j["checkpoints"] = c.sim.checkpoint_list();
  j["spectrum"] = {{"variant", to_string(c.sim.spectrum.variant)},
                   {"H", c.sim.spectrum.H},
                   {"eta", c.sim.spectrum.eta},
                   {"rho", rho_to_json(c.sim.spectrum.rho)},
                   {"amplitude", c.sim.spectrum.amplitude}};
  j["grid"] = {{"dim_t", c.sim.grid.dim_t},
               {"n", c.sim.grid.n},
               {"dx", c.sim.grid.dx},
               {"nz", c.sim.grid.nz},
               {"dz", c.sim.grid.dz}};
  j["auto_nz"] = c.auto_nz;
  j["wn_dz"] = c.wn_dz;
  j["mean_field"] = c.mean_field;
  j["thetas"] = json::array();
  for (const auto& t : c.thetas) j["thetas"].push_back({{"name", t.name}, {"center", t.center}, {"width", t.width}});
  return j.dump();
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c = RunConfig::desk();
  try {
    reject_unknown(j,
                   {"k_tilde", "eps", "gamma", "width", "z_final", "dz_solver", "absorber_rate", "checkpoints",
                    "spectrum", "grid", "auto_nz", "wn_dz", "mean_field", "thetas"},
                   "config");
    read_if(j, "k_tilde", c.sim.k_tilde);
    read_if(j, "eps", c.sim.eps);
    read_if(j, "gamma", c.sim.gamma);
    read_if(j, "width", c.sim.width);
    read_if(j, "z_final", c.sim.z_final);
    read_if(j, "dz_solver", c.sim.dz_solver);
    read_if(j, "absorber_rate", c.sim.absorber_rate);
    read_if(j, "checkpoints", c.sim.checkpoints);
    read_if(j, "auto_nz", c.auto_nz);
    read_if(j, "wn_dz", c.wn_dz);
    read_if(j, "mean_field", c.mean_field);
    if (j.contains("spectrum")) {
      const auto& s = j.at("spectrum");
      reject_unknown(s, {"variant", "H", "eta", "rho", "amplitude"}, "spectrum");
      if (s.contains("variant")) c.sim.spectrum.variant = variant_from_string(s.at("variant").get<std::string>());
      read_if(s, "H", c.sim.spectrum.H);
      read_if(s, "eta", c.sim.spectrum.eta);
      if (s.contains("rho")) c.sim.spectrum.rho = rho_from_json(s.at("rho"));
      read_if(s, "amplitude", c.sim.spectrum.amplitude);
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown(g, {"dim_t", "n", "dx", "nz", "dz"}, "grid");
      read_if(g, "dim_t", c.sim.grid.dim_t);
      read_if(g, "n", c.sim.grid.n);
      read_if(g, "dx", c.sim.grid.dx);
      read_if(g, "nz", c.sim.grid.nz);
      read_if(g, "dz", c.sim.grid.dz);
    }
    if (j.contains("thetas")) {
      c.thetas.clear();
      for (const auto& t : j.at("thetas")) {
        reject_unknown(t, {"name", "center", "width"}, "theta");
        ThetaSpec s;
        read_if(t, "name", s.name);
        read_if(t, "center", s.center);
        read_if(t, "width", s.width);
        c.thetas.push_back(s);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a(config_to_json(config)); }

std::string ndjson_header(const RunConfig& config, Model model, std::uint64_t seed) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(config);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  json j;
  j["type"] = "header";
  j["model"] = to_string(model);
  j["seed"] = seed;
  j["config_hash"] = hash.str();
  j["timestamp"] = ts.str();
  return j.dump();
}

void write_summary_csv(std::ostream& os, const EnsembleStats& stats, const std::vector<ThetaSpec>& thetas) {
  os << "z,theta,mean_re,mean_im,var_re,var_im,se_re,se_im,mean_width,scintillation\n";
  os.precision(12);
  const auto z = stats.z_values();
  const double n = static_cast<double>(stats.count());
  for (std::size_t cp = 0; cp < stats.checkpoints(); ++cp) {
    for (std::size_t t = 0; t < stats.thetas(); ++t) {
      const auto m = stats.mean(cp, t);
      os << z[cp] << "," << thetas.at(t).name << "," << m.real() << "," << m.imag() << "," << stats.var_re(cp, t) << ","
         << stats.var_im(cp, t) << "," << std::sqrt(stats.var_re(cp, t) / n) << ","
         << std::sqrt(stats.var_im(cp, t) / n) << "," << stats.mean_width(cp) << "," << stats.scintillation(cp) << "\n";
    }
  }
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "eps,distance,floor,excess,se,sup_theta_v\n";
  os.precision(12);
  for (const auto& e : report.entries) {
    os << e.eps << "," << e.distance << "," << e.floor << "," << e.excess << "," << e.se << "," << e.sup_theta_v << "\n";
  }
}

void write_scale_limit_csv(std::ostream& os, const ScaleLimitReport& report) {
  os << "eta,rho,gamma0,gap_rho,gap_pinned,mean_field_factor\n";
  os.precision(12);
  for (const auto& r : report.rows) {
    os << r.eta << "," << r.rho << "," << r.gamma0 << "," << r.gap_rho << "," << r.gap_pinned << ","
       << r.mean_field_factor << "\n";
  }
}

}  // namespace beamwave
