#include "beamwave/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "beamwave/error.hpp"
#include "beamwave/fft.hpp"
#include "beamwave/rng.hpp"

namespace beamwave {

namespace {

constexpr char kMagic[8] = {'B', 'W', 'S', 'T', 'A', 'C', 'K', '1'};

double signed_wavenumber(int j, int n, double spacing) {
  const int m = j <= n / 2 ? j : j - n;
  return 2.0 * M_PI * m / (n * spacing);
}

void check_synthesis_grid(const SpectrumParams& params, const GridSpec& grid) {
  params.validate();
  grid.validate();
  if (grid.nz < 1) throw ConfigError("synthesis needs nz >= 1");
  if (!(params.eta > 0.0)) throw ConfigError("synthesis needs eta > 0 (finite point variance)");
  if (params.rho_finite() && grid.dx > 4.0 * M_PI / params.rho) {
    std::ostringstream os;
    os << "inner scale unresolved: dx * rho / pi = " << grid.dx * params.rho / M_PI << " exceeds 4";
    throw ConfigError(os.str());
  }
}

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated screen stack stream");
  return v;
}

}  // namespace

std::span<const double> ScreenStack::slab(int j) const {
  if (j < 0 || j >= grid.nz) throw ConfigError("slab index out of range");
  const std::size_t np = grid.points();
  return {values.data() + static_cast<std::size_t>(j) * np, np};
}

ScreenStack zero_stack(const GridSpec& grid) {
  grid.validate();
  ScreenStack s;
  s.grid = grid;
  s.values.assign(static_cast<std::size_t>(grid.nz) * grid.points(), 0.0);
  return s;
}

std::vector<double> synthesis_weights(const SpectrumParams& params, const GridSpec& grid) {
  check_synthesis_grid(params, grid);
  const double dxi = 2.0 * M_PI / (grid.nz * grid.dz);
  const double dp = grid.dp();
  const std::size_t np = grid.points();
  std::vector<double> w(static_cast<std::size_t>(grid.nz) * np);
  if (grid.dim_t == 1) {
    const double xi_max = M_PI / grid.dz;
    const double p_max = M_PI / grid.dx;
    const double s_min = std::min(dxi, dp);
    const PlanarMarginal marginal(params, s_min, 1.01 * std::hypot(xi_max, p_max));
    for (int a = 0; a < grid.nz; ++a) {
      const double xi = signed_wavenumber(a, grid.nz, grid.dz);
      for (int b = 0; b < grid.n; ++b) {
        w[static_cast<std::size_t>(a) * np + b] = marginal(std::hypot(xi, grid.wavenumber(b))) * dxi * dp;
      }
    }
  } else {
    for (int a = 0; a < grid.nz; ++a) {
      const double xi = signed_wavenumber(a, grid.nz, grid.dz);
      for (std::size_t b = 0; b < np; ++b) {
        const double k = std::sqrt(xi * xi + grid.wavenumber2(b));
        w[static_cast<std::size_t>(a) * np + b] = eval_radial(params, k) * dxi * dp * dp;
      }
    }
  }
  return w;
}

Synthesizer::Synthesizer(const SpectrumParams& params, const GridSpec& grid)
    : params_(params), grid_(grid), weights_(synthesis_weights(params, grid)) {
  dims_ = {grid.nz, grid.n};
  if (grid.dim_t == 2) dims_.push_back(grid.n);
}

ScreenStack Synthesizer::draw(std::uint64_t seed, std::uint64_t realization) const {
  StreamRng rng(seed, realization, Purpose::Synthesis);
  std::vector<Complex> modes(weights_.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    modes[i] = std::sqrt(weights_[i]) * Complex(re, im);
  }
  const Fft fft(dims_);
  fft.backward(modes);
  ScreenStack s;
  s.grid = grid_;
  s.seed = seed;
  s.realization = realization;
  s.params_hash = params_.hash();
  s.values.resize(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) s.values[i] = modes[i].real();
  return s;
}

ScreenStack synth_volume(const SpectrumParams& params, const GridSpec& grid, std::uint64_t seed,
                         std::uint64_t realization) {
  return Synthesizer(params, grid).draw(seed, realization);
}

int slab_index(const ScreenStack& stack, double t) {
  const double u = (t - stack.z0) / stack.grid.dz;
  if (!(u >= 0.0) || u >= stack.grid.nz) {
    std::ostringstream os;
    os << "longitudinal coordinate " << t << " outside screen stack [" << stack.z0 << ", "
       << stack.z0 + stack.extent() << ")";
    throw ConfigError(os.str());
  }
  return std::min(static_cast<int>(std::floor(u)), stack.grid.nz - 1);
}

std::vector<double> rescaled_slab(const ScreenStack& stack, double z, double eps) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  const auto src = stack.slab(slab_index(stack, z / (eps * eps)));
  std::vector<double> out(src.begin(), src.end());
  for (double& v : out) v /= eps;
  return out;
}

QuasiGaussianReport quasi_gaussian_check(std::span<const ScreenStack> stacks, std::size_t min_realizations) {
  if (stacks.size() < min_realizations) {
    throw ConfigError("quasi-Gaussian check needs at least " + std::to_string(min_realizations) + " realizations");
  }
  const auto m = static_cast<double>(stacks.size());
  // Per-realization means of V^2 and V^4; realizations are independent.
  std::vector<double> a(stacks.size()), b(stacks.size());
  for (std::size_t r = 0; r < stacks.size(); ++r) {
    double s2 = 0.0, s4 = 0.0;
    for (double v : stacks[r].values) {
      const double v2 = v * v;
      s2 += v2;
      s4 += v2 * v2;
    }
    const auto cnt = static_cast<double>(stacks[r].values.size());
    a[r] = s2 / cnt;
    b[r] = s4 / cnt;
  }
  double ma = 0.0, mb = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    ma += a[r];
    mb += b[r];
  }
  ma /= m;
  mb /= m;
  QuasiGaussianReport rep;
  rep.realizations = stacks.size();
  if (ma == 0.0) throw ConfigError("quasi-Gaussian check on an identically zero ensemble");
  rep.ratio = mb / (ma * ma);
  double vaa = 0.0, vbb = 0.0, vab = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    vaa += (a[r] - ma) * (a[r] - ma);
    vbb += (b[r] - mb) * (b[r] - mb);
    vab += (a[r] - ma) * (b[r] - mb);
  }
  const double denom = m * (m - 1.0);
  vaa /= denom;
  vbb /= denom;
  vab /= denom;
  // Gradient of b / a^2 is (-2 b / a^3, 1 / a^2).
  const double ga = -2.0 * mb / (ma * ma * ma);
  const double gb = 1.0 / (ma * ma);
  rep.se = std::sqrt(std::max(0.0, ga * ga * vaa + gb * gb * vbb + 2.0 * ga * gb * vab));
  return rep;
}

void write_stack(std::ostream& os, const ScreenStack& stack) {
  os.write(kMagic, sizeof(kMagic));
  put<std::int32_t>(os, stack.grid.dim_t);
  put<std::int32_t>(os, stack.grid.n);
  put<double>(os, stack.grid.dx);
  put<std::int32_t>(os, stack.grid.nz);
  put<double>(os, stack.grid.dz);
  put<double>(os, stack.z0);
  put<std::uint64_t>(os, stack.seed);
  put<std::uint64_t>(os, stack.realization);
  put<std::uint64_t>(os, stack.params_hash);
  for (double v : stack.values) put<float>(os, static_cast<float>(v));
}

ScreenStack read_stack(std::istream& is) {
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ConfigError("not a screen stack stream");
  ScreenStack s;
  s.grid.dim_t = get<std::int32_t>(is);
  s.grid.n = get<std::int32_t>(is);
  s.grid.dx = get<double>(is);
  s.grid.nz = get<std::int32_t>(is);
  s.grid.dz = get<double>(is);
  s.grid.validate();
  s.z0 = get<double>(is);
  s.seed = get<std::uint64_t>(is);
  s.realization = get<std::uint64_t>(is);
  s.params_hash = get<std::uint64_t>(is);
  s.values.resize(static_cast<std::size_t>(s.grid.nz) * s.grid.points());
  for (double& v : s.values) v = get<float>(is);
  return s;
}

}  // namespace beamwave
