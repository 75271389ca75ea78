#include "beamwave/grid.hpp"

#include <cmath>
#include <sstream>

#include "beamwave/error.hpp"
#include "beamwave/spectra.hpp"

namespace beamwave {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t GridSpec::points() const {
  std::size_t total = 1;
  for (int d = 0; d < dim_t; ++d) total *= static_cast<std::size_t>(n);
  return total;
}

double GridSpec::cell() const { return dim_t == 1 ? dx : dx * dx; }

double GridSpec::wavenumber(int j) const {
  const int k = j <= n / 2 ? j : j - n;
  return 2.0 * M_PI * k / (n * dx);
}

double GridSpec::dp() const { return 2.0 * M_PI / (n * dx); }

std::size_t GridSpec::origin_index() const {
  const std::size_t c = static_cast<std::size_t>(n / 2);
  return dim_t == 1 ? c : c * n + c;
}

double GridSpec::radius2(std::size_t idx) const {
  if (dim_t == 1) {
    const double x = coord(static_cast<int>(idx));
    return x * x;
  }
  const double x = coord(static_cast<int>(idx / n));
  const double y = coord(static_cast<int>(idx % n));
  return x * x + y * y;
}

double GridSpec::wavenumber2(std::size_t idx) const {
  if (dim_t == 1) {
    const double p = wavenumber(static_cast<int>(idx));
    return p * p;
  }
  const double p = wavenumber(static_cast<int>(idx / n));
  const double q = wavenumber(static_cast<int>(idx % n));
  return p * p + q * q;
}

void GridSpec::validate() const {
  if (dim_t != 1 && dim_t != 2) throw ConfigError("dim_t must be 1 or 2");
  if (n < 8 || !is_power_of_two(n)) throw ConfigError("n must be a power of two and at least 8");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("dx must be positive");
  if (nz < 1) throw ConfigError("nz must be at least 1");
  if (!(dz > 0.0) || !std::isfinite(dz)) throw ConfigError("dz must be positive");
}

std::vector<std::string> resolution_warnings(const GridSpec& grid, const SpectrumParams& params) {
  std::vector<std::string> out;
  if (params.eta > 0.0) {
    const double need = 8.0 / params.eta;
    if (grid.length() < need) {
      std::ostringstream os;
      os << "outer scale unresolved: n*dx = " << grid.length() << " < 8/eta = " << need
         << " (ratio " << grid.length() / need << ")";
      out.push_back(os.str());
    }
  }
  if (params.rho_finite()) {
    const double limit = M_PI / params.rho;
    if (grid.dx > limit) {
      std::ostringstream os;
      os << "inner scale unresolved: dx = " << grid.dx << " > pi/rho = " << limit << " (ratio "
         << grid.dx / limit << ")";
      out.push_back(os.str());
    }
  }
  return out;
}

}  // namespace beamwave
