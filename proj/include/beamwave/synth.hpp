#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "beamwave/grid.hpp"
#include "beamwave/spectra.hpp"

namespace beamwave {

/// nz transverse slabs of a synthesized medium. Slab j covers the
/// longitudinal interval [z0 + j dz, z0 + (j + 1) dz).
struct ScreenStack {
  GridSpec grid;
  double z0 = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
  std::uint64_t params_hash = 0;
  /// Row-major (slab, transverse point).
  std::vector<double> values;

  std::span<const double> slab(int j) const;
  double extent() const { return grid.nz * grid.dz; }
};

/// Stack with every value zero (a homogeneous medium).
ScreenStack zero_stack(const GridSpec& grid);

/// Gaussian random medium with density Phi on the (t, x) torus. dim_t = 1
/// uses the planar section of the 3D medium; dim_t = 2 synthesizes the full
/// 3D volume. Needs eta > 0; errors when dx > 4 pi / rho.
ScreenStack synth_volume(const SpectrumParams& params, const GridSpec& grid, std::uint64_t seed,
                         std::uint64_t realization = 0);

/// Reusable synthesis plan: mode weights and FFT for one (params, grid).
class Synthesizer {
 public:
  Synthesizer(const SpectrumParams& params, const GridSpec& grid);
  ScreenStack draw(std::uint64_t seed, std::uint64_t realization) const;
  const GridSpec& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }

 private:
  SpectrumParams params_;
  GridSpec grid_;
  std::vector<double> weights_;
  std::vector<int> dims_;
};

/// Variance of each mode, Phi * dxi * dp^dim_t, in FFT order over (t, x).
std::vector<double> synthesis_weights(const SpectrumParams& params, const GridSpec& grid);

/// V(z / eps^2, x) / eps using the slab containing z / eps^2.
std::vector<double> rescaled_slab(const ScreenStack& stack, double z, double eps);

/// Slab index containing longitudinal coordinate t; throws outside the stack.
int slab_index(const ScreenStack& stack, double t);

struct QuasiGaussianReport {
  std::size_t realizations = 0;
  /// E[V^4] / E[V^2]^2 pooled over every sample.
  double ratio = 0.0;
  /// Delta-method standard error treating realizations as the independent unit.
  double se = 0.0;
};

/// Needs at least 500 stacks; smaller ensembles raise ConfigError.
QuasiGaussianReport quasi_gaussian_check(std::span<const ScreenStack> stacks, std::size_t min_realizations = 500);

/// Binary replay format: magic "BWSTACK1", grid, z0, seed, realization,
/// params hash, then nz * points float32 values.
void write_stack(std::ostream& os, const ScreenStack& stack);
ScreenStack read_stack(std::istream& is);

}  // namespace beamwave
