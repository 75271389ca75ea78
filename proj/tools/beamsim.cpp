// beamsim: command-line front end for the beamwave library.
// Exit codes: 0 success, 2 configuration error, 3 numerical invariant violated.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "beamwave/covariance.hpp"
#include "beamwave/error.hpp"
#include "beamwave/harness.hpp"
#include "beamwave/moments.hpp"
#include "beamwave/spectra.hpp"
#include "beamwave/synth.hpp"

namespace bw = beamwave;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigExit = 2;
constexpr int kInvariantExit = 3;

bw::RunConfig load_config(const std::string& path) {
  if (path.empty()) return bw::RunConfig::desk();
  std::ifstream in(path);
  if (!in) throw bw::ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return bw::config_from_json(buf.str());
}

// Writes to the named file, or to stdout for "" and "-".
template <typename F>
void emit(const std::string& path, F&& write, std::ios::openmode mode = std::ios::out) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, mode);
  if (!out) throw bw::ConfigError("cannot write " + path);
  write(out);
}

std::ofstream open_in(const fs::path& dir, const std::string& name) {
  std::ofstream out(dir / name);
  if (!out) throw bw::ConfigError("cannot write " + (dir / name).string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam propagation in random media: parabolic and white-noise models"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "JSON run configuration (defaults to the desk configuration)");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Tabulate the radial spectrum Phi(k) as CSV");
  double k_min = 1e-2, k_max = 1e2;
  int k_count = 200;
  std::string spectrum_out;
  spectrum->add_option("--kmin", k_min, "Smallest wavenumber")->check(CLI::PositiveNumber);
  spectrum->add_option("--kmax", k_max, "Largest wavenumber")->check(CLI::PositiveNumber);
  spectrum->add_option("--count", k_count, "Number of log-spaced samples")->check(CLI::Range(2, 1000000));
  spectrum->add_option("-o,--out", spectrum_out, "Output CSV (stdout if omitted)");

  // kernel
  auto* kernel = app.add_subcommand("kernel", "Export the transverse covariance table on the run grid");
  std::string kernel_out;
  kernel->add_option("-o,--out", kernel_out, "Output CSV (stdout if omitted)");

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize one screen stack and write it in binary form");
  std::uint64_t synth_seed = 1, synth_index = 0;
  std::string synth_out;
  synth->add_option("--seed", synth_seed, "Master seed");
  synth->add_option("--realization", synth_index, "Realization index");
  synth->add_option("-o,--out", synth_out, "Output file")->required();

  // run
  auto* run = app.add_subcommand("run", "Run an ensemble and write config, NDJSON observables and a CSV summary");
  std::string model_name = "parabolic", run_dir;
  std::size_t realizations = 100;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  run->add_option("--model", model_name, "parabolic or wn")->check(CLI::IsMember({"parabolic", "wn"}));
  run->add_option("-M,--realizations", realizations, "Ensemble size")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  run->add_option("--out", run_dir, "Output directory")->required();

  // moments
  auto* moments = app.add_subcommand("moments", "Solve the n-point moment equation and export a slice");
  int order = 2;
  std::string variant = "standard", moments_out;
  double moments_dz = 0.01;
  moments->add_option("-n,--order", order, "Moment order (1 or 2)")->check(CLI::Range(1, 2));
  moments->add_option("--variant", variant, "standard or pinned")->check(CLI::IsMember({"standard", "pinned"}));
  moments->add_option("--dz", moments_dz, "Splitting step")->check(CLI::PositiveNumber);
  moments->add_option("-o,--out", moments_out, "Output CSV (stdout if omitted)");

  // converge
  auto* converge = app.add_subcommand("converge", "Distance between parabolic and white-noise laws across eps");
  std::vector<double> eps_list{0.4, 0.2, 0.1};
  std::size_t conv_m = 2000;
  std::uint64_t conv_seed = 1;
  std::string conv_out;
  converge->add_option("--eps", eps_list, "Strictly decreasing eps values");
  converge->add_option("-M,--realizations", conv_m, "Ensemble size per eps");
  converge->add_option("--seed", conv_seed, "Master seed");
  converge->add_option("-o,--out", conv_out, "Output CSV (stdout if omitted)");

  // scale-limits
  auto* scale = app.add_subcommand("scale-limits", "Tabulate kernels across (eta, rho) against their limits");
  std::vector<double> etas{1.0, 0.5, 0.25}, rhos{8.0, 16.0, 32.0, 64.0, bw::kInf};
  bool pinned = false;
  std::string scale_out;
  scale->add_option("--etas", etas, "Outer-scale parameters (> 0)");
  scale->add_option("--rhos", rhos, "Inner-scale parameters (inf allowed)");
  scale->add_flag("--pinned", pinned, "Compare with the origin-pinned limit (needs H < 1/2)");
  scale->add_option("-o,--out", scale_out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    const bw::RunConfig config = load_config(config_path);

    if (*spectrum) {
      const auto& p = config.sim.spectrum;
      p.validate();
      emit(spectrum_out, [&](std::ostream& os) {
        os << "k,phi\n";
        os.precision(17);
        for (int i = 0; i < k_count; ++i) {
          const double k = k_min * std::pow(k_max / k_min, i / (k_count - 1.0));
          os << k << "," << bw::eval_radial(p, k) << "\n";
        }
      });
    } else if (*kernel) {
      bw::GridSpec g = config.sim.grid;
      g.nz = 1;
      const auto k = bw::build_kernel_grid(config.sim.spectrum, g, {.table = true});
      emit(kernel_out, [&](std::ostream& os) { k.export_csv(os); });
    } else if (*synth) {
      const auto sized = bw::configure_for_eps(config, config.sim.eps);
      const auto stack = bw::synth_volume(sized.sim.spectrum, sized.sim.grid, synth_seed, synth_index);
      emit(synth_out, [&](std::ostream& os) { bw::write_stack(os, stack); }, std::ios::out | std::ios::binary);
    } else if (*run) {
      bw::RunConfig c = config;
      c.workers = workers;
      const auto model = bw::model_from_string(model_name);
      const auto out = bw::run_ensemble(c, model, realizations, seed, 0, true);
      fs::create_directories(run_dir);
      open_in(run_dir, "config.json") << bw::config_to_json(c) << "\n";
      auto nd = open_in(run_dir, "observables.ndjson");
      nd << bw::ndjson_header(c, model, seed) << "\n";
      for (const auto& line : out.ndjson) nd << line << "\n";
      auto summary = open_in(run_dir, "summary.csv");
      bw::write_summary_csv(summary, out.stats, c.thetas);
    } else if (*moments) {
      bw::RunConfig c = config;
      if (variant == "pinned") {
        c.sim.spectrum.eta = 0.0;
        c.sim.spectrum.rho = bw::kInf;
      }
      c.sim.dz_solver = bw::configure_for_eps(c, c.sim.eps).sim.dz_solver;
      const auto& sim = c.sim;
      const auto k = bw::run_kernel(c);
      const auto f0 = bw::initial_field(sim);
      const auto F = bw::solve_npt(bw::tensor_initial(f0, order), *k, sim.k_tilde, sim.z_final, moments_dz);
      emit(moments_out, [&](std::ostream& os) { bw::export_slice_csv(os, F); });
    } else if (*converge) {
      const auto rep = bw::converge_study(config, eps_list, conv_m, conv_seed);
      emit(conv_out, [&](std::ostream& os) { bw::write_convergence_csv(os, rep); });
      std::cerr << (rep.monotone ? "distance strictly decreasing in eps\n" : "distance NOT strictly decreasing\n");
    } else if (*scale) {
      bw::ScaleLimitRequest req;
      req.base = config.sim.spectrum;
      req.etas = etas;
      req.rhos = rhos;
      req.k_tilde = config.sim.k_tilde;
      req.z = config.sim.z_final;
      req.pinned_limit = pinned;
      const auto rep = bw::scale_limit_study(req);
      emit(scale_out, [&](std::ostream& os) { bw::write_scale_limit_csv(os, rep); });
      if (pinned) std::cerr << "polarization residual " << rep.polarization_residual << "\n";
    }
  } catch (const bw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const bw::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kInvariantExit;
  }
  return 0;
}
