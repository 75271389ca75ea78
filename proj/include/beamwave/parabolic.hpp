#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamwave/fft.hpp"
#include "beamwave/grid.hpp"
#include "beamwave/spectra.hpp"
#include "beamwave/synth.hpp"

namespace beamwave {

/// Transverse field Psi(z, .) on the grid, row-major over the transverse axes.
struct WaveField {
  std::vector<Complex> values;
  GridSpec grid;
  double k_tilde = 1.0;
  double z = 0.0;
};

/// Real test function theta on the transverse grid.
struct TestFunction {
  std::string name;
  std::vector<double> values;
};

enum class InitialKind { Gaussian, Custom };

/// Rescaled parabolic problem
///   i k dPsi/dz = -(1/2) Laplacian Psi - (k^2 / eps) V(z / eps^2, x) Psi,
///   Psi(0, x) = F0(sqrt(gamma) x).
/// grid.nz and grid.dz describe the screen stack in the fast variable t = z / eps^2.
struct SimConfig {
  double k_tilde = 1.0;
  double eps = 1.0;
  double gamma = 1.0;
  SpectrumParams spectrum;
  GridSpec grid;
  double z_final = 1.0;
  double dz_solver = 0.01;
  InitialKind initial = InitialKind::Gaussian;
  /// Gaussian preset F0(u) = exp(-|u|^2 / (2 width^2)).
  double width = 1.0;
  std::vector<Complex> custom;
  /// Strictly increasing, inside (0, z_final]. Empty means {z_final}.
  std::vector<double> checkpoints;
  /// Peak damping rate of a raised-cosine absorber on the boundary ring.
  /// 0 keeps the periodic, exactly unitary scheme; > 0 makes the norm nonincreasing.
  double absorber_rate = 0.0;

  void validate() const;
  std::vector<std::string> warnings() const;
  std::vector<double> checkpoint_list() const;
};

/// Observables of one field at one checkpoint.
struct CheckpointRecord {
  double z = 0.0;
  double norm = 0.0;
  double width = 0.0;
  double peak_intensity = 0.0;
  std::array<double, 2> centroid{0.0, 0.0};
  /// <Psi_z, theta> for each test function, in order.
  std::vector<Complex> obs;
};

struct Trajectory {
  std::vector<CheckpointRecord> records;
  /// Fields at the checkpoints, kept only on request.
  std::vector<WaveField> fields;
};

/// Boundary ring: the outermost n/16 points on each side of every axis.
int boundary_ring_width(const GridSpec& grid);
bool in_boundary_ring(const GridSpec& grid, std::size_t idx);
/// Absorber profile in [0, 1]: 0 off the ring, rising as cos^2 to 1 at the outermost points.
std::vector<double> absorber_profile(const GridSpec& grid);

/// Throws ConfigError when more than 1e-8 of the field's energy sits on the ring.
WaveField initial_field(const SimConfig& config);

/// Discrete L2 norm: sqrt(sum |Psi|^2 dx^dim_t).
double l2_norm(const WaveField& field);

/// Exact free flow by the Fourier multiplier exp(-i |p|^2 dz / (2 k)).
/// Precomputes multipliers; one instance per thread.
class FreeFlow {
 public:
  FreeFlow(const GridSpec& grid, double k_tilde);
  void apply(std::span<Complex> values, double dz);

 private:
  const std::vector<Complex>& multiplier(double dz);

  GridSpec grid_;
  double k_tilde_;
  Fft fft_;
  std::vector<double> p2_;
  std::vector<std::pair<double, std::vector<Complex>>> cache_;
};

WaveField free_step(const WaveField& field, double dz);
/// Multiplies pointwise by exp(i coeff slab(x)).
WaveField phase_step(const WaveField& field, std::span<const double> slab, double coeff);
void apply_phase(std::span<Complex> values, std::span<const double> slab, double coeff);

/// Step endpoints used by propagate: each checkpoint interval is cut into
/// equal steps no longer than dz_solver.
std::vector<double> step_partition(const SimConfig& config);
std::vector<double> step_partition(std::span<const double> checkpoints, double dz);

/// Integral of V(s / eps^2, x) over s in [za, zb], exact for the
/// piecewise-constant stack.
std::vector<double> slab_integral(const ScreenStack& stack, double za, double zb, double eps);

struct PropagateOptions {
  bool keep_fields = false;
  /// Relative norm drift that aborts the run.
  double norm_tolerance = 1e-6;
};

/// Strang splitting free(h/2) phase free(h/2) from z = 0 to z_final.
Trajectory propagate(const SimConfig& config, const ScreenStack& stack, std::span<const TestFunction> thetas,
                     PropagateOptions options = {});

/// Runs the forward scheme backwards from field at z_final (negated steps,
/// conjugated phases, reversed partition). Inverts propagate to rounding.
WaveField reverse_propagate(const SimConfig& config, const ScreenStack& stack, const WaveField& field);

/// Bilinear pairing sum Psi(x) theta(x) dx^dim_t. theta must vanish on the boundary ring.
Complex observe(const WaveField& field, const TestFunction& theta);
Complex observe(std::span<const Complex> values, const GridSpec& grid, const TestFunction& theta);

/// Intensity-weighted centroid.
std::array<double, 2> centroid(const WaveField& field);
/// Second-moment radius: width^2 = (2 / dim_t) <|x - centroid|^2>_I.
double beam_width(const WaveField& field);
double peak_intensity(const WaveField& field);

CheckpointRecord measure(const WaveField& field, std::span<const TestFunction> thetas);

/// exp(-|x - center|^2 / (2 width^2)).
TestFunction gaussian_test(const GridSpec& grid, std::array<double, 2> center, double width, std::string name);

/// Throws ConfigError when theta is not negligible on the boundary ring.
void check_test_function(const GridSpec& grid, const TestFunction& theta);

}  // namespace beamwave
