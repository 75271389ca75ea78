#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "beamwave/grid.hpp"
#include "beamwave/spectra.hpp"

namespace beamwave {

/// Which limiting kernel a parameter set selects.
enum class KernelMode {
  Finite,        ///< eta > 0, rho < inf
  RhoInfinite,   ///< eta > 0, rho = inf
  OriginPinned,  ///< eta = 0, rho = inf, H < 1/2
};

std::string to_string(KernelMode m);

/// Classifies params; rejects eta = 0 with finite rho and pinned requests
/// with H >= 1/2.
KernelMode kernel_mode(const SpectrumParams& params);

/// Gamma1(r) = pi * integral cos(x.p) Phi(0, p) dp with |x| = r, reduced to
/// a J0 Hankel integral. Needs eta > 0.
double gamma1_radial(const SpectrumParams& params, double r);

/// D(r) = 2 pi * integral (1 - cos(x.p)) Phi(0, p) dp with |x| = r. Finite
/// when eta > 0, or when eta = 0 and H < 1/2. Equals 2 (Gamma0 - Gamma1(r))
/// whenever Gamma0 exists.
double structure_function(const SpectrumParams& params, double r);

/// D(r) restricted to the origin-pinned mode.
double gamma_prime_structure(const SpectrumParams& params, double r);

/// Origin-pinned cross covariance, integrated directly from
/// pi * integral (e^{ix.p} - 1)(e^{-iy.p} - 1) Phi(0, p) dp.
double gamma_prime_cross(const SpectrumParams& params, const std::array<double, 2>& x,
                         const std::array<double, 2>& y);

struct KernelOptions {
  bool table = true;
  bool matrix = false;
  /// Smallest eigenvalue allowed is -psd_tolerance * ||M||.
  double psd_tolerance = 1e-8;
};

/// Tabulated limiting covariance for one transverse grid. Immutable once built.
class CovarianceKernel {
 public:
  static CovarianceKernel build(const SpectrumParams& params, const GridSpec& grid, KernelOptions options = {});
  /// Identically zero kernel (free propagation).
  static CovarianceKernel vanishing(const GridSpec& grid);

  KernelMode mode() const { return mode_; }
  bool is_vanishing() const { return !params_.has_value(); }
  const std::optional<SpectrumParams>& params() const { return params_; }
  const GridSpec& grid() const { return grid_; }

  /// Gamma1(x, x); zero in the pinned mode where it does not exist.
  double gamma0() const { return gamma0_; }
  /// Gamma0 as realized on the periodic grid (sum of spectral weights).
  double grid_gamma0() const;

  double dr() const { return dr_; }
  /// Gamma1(r) samples, or D(r) samples in the pinned mode, at r = i * dr.
  std::span<const double> radial_table() const { return table_; }
  /// Interpolated Gamma1(r) (or D(r) when pinned).
  double radial(double r) const;
  /// Covariance between two transverse points (either mode).
  double covariance(const std::array<double, 2>& x, const std::array<double, 2>& y) const;
  /// Covariance between flat grid indices.
  double between(std::size_t i, std::size_t j) const;

  bool has_matrix() const { return matrix_.size() > 0; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// Periodic-grid spectral weights w(p) = pi S(p) dp^dim_t in FFT order,
  /// where S is the transverse spectrum (Phi(0, p) for dim_t = 2, its
  /// planar marginal for dim_t = 1). Empty in the pinned mode.
  std::span<const double> spectral_weights() const { return weights_; }

  /// Writes "r,value" rows.
  void export_csv(std::ostream& os) const;

 private:
  CovarianceKernel() = default;
  std::array<double, 2> point(std::size_t idx) const;

  KernelMode mode_ = KernelMode::Finite;
  std::optional<SpectrumParams> params_;
  GridSpec grid_;
  double gamma0_ = 0.0;
  double dr_ = 0.0;
  std::vector<double> table_;
  std::vector<double> weights_;
  Eigen::MatrixXd matrix_;
  double min_eigenvalue_ = 0.0;
};

/// Tabulated kernel for a transverse grid; same as CovarianceKernel::build.
CovarianceKernel build_kernel_grid(const SpectrumParams& params, const GridSpec& grid, KernelOptions options = {});

/// Transverse spectrum on the grid's FFT lattice, S(p) in FFT order.
std::vector<double> transverse_spectrum(const SpectrumParams& params, const GridSpec& grid);

}  // namespace beamwave
