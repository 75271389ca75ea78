#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace beamwave {

struct SpectrumParams;

/// Uniform grid: dim_t transverse axes of n points with spacing dx, plus nz
/// longitudinal slabs of thickness dz. Transverse coordinates are
/// x_j = (j - n/2) dx so the origin sits at index n/2 on every axis.
struct GridSpec {
  int dim_t = 1;
  int n = 64;
  double dx = 0.1;
  int nz = 1;
  double dz = 1.0;

  /// Number of transverse points, n^dim_t.
  std::size_t points() const;
  double length() const { return n * dx; }
  /// Transverse cell measure dx^dim_t.
  double cell() const;
  double coord(int j) const { return (j - n / 2) * dx; }
  /// Wavenumber of FFT bin j (standard FFT ordering).
  double wavenumber(int j) const;
  double dp() const;
  /// Flat index of the origin.
  std::size_t origin_index() const;
  /// Squared distance of flat point idx from the origin.
  double radius2(std::size_t idx) const;
  /// Squared wavenumber magnitude of flat FFT bin idx.
  double wavenumber2(std::size_t idx) const;

  /// Throws ConfigError on structural problems (n not a power of two, n < 8,
  /// non-positive spacings, dim_t not 1 or 2).
  void validate() const;
};

/// Soft resolution checks. Each entry carries the offending ratio.
std::vector<std::string> resolution_warnings(const GridSpec& grid, const SpectrumParams& params);

bool is_power_of_two(int n);

}  // namespace beamwave
