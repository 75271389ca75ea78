#pragma once

#include <iosfwd>
#include <vector>

#include "beamwave/covariance.hpp"
#include "beamwave/parabolic.hpp"

namespace beamwave {

/// F(x_1, ..., x_n) = E[Psi(x_1) ... Psi(x_n)] on the n-fold product grid,
/// row-major with x_1 slowest.
struct MomentField {
  int order = 1;
  std::vector<Complex> values;
  GridSpec grid;
  double z = 0.0;
};

/// exp(-k^2 gamma0 z) times free propagation of F0 over z.
WaveField mean_field_exact(const WaveField& F0, double z, double k_tilde, double gamma0);

/// Product F0(x_1) ... F0(x_n) of a deterministic initial field.
MomentField tensor_initial(const WaveField& F0, int order);

/// Two-point covariance used by the moment solver; matches the white-noise
/// sampler (torus sum for homogeneous kernels, the dense matrix when pinned).
class GridCovariance {
 public:
  explicit GridCovariance(const CovarianceKernel& kernel);
  double operator()(std::size_t i, std::size_t j) const;

 private:
  const CovarianceKernel* kernel_;
  bool pinned_ = false;
  bool vanishing_ = false;
  std::vector<double> lag_;
};

/// C2 on the product grid: -k^2 sum_{j,l} Gamma(x_j, x_l). Throws
/// InvariantViolation if any entry is positive.
std::vector<double> damping_field(const CovarianceKernel& kernel, int order, double k_tilde);

/// Strang splitting of dF/dz = C1 F + C2 F with exact free flow for C1.
MomentField solve_npt(const MomentField& F0, const CovarianceKernel& kernel, double k_tilde, double z, double dz);

double l2_norm(const MomentField& field);

/// Writes "x,re,im" along x_1 with the remaining coordinates at the origin.
void export_slice_csv(std::ostream& os, const MomentField& field);

}  // namespace beamwave
