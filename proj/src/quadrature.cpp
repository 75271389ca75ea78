#include "beamwave/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "beamwave/error.hpp"

namespace beamwave::quad {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr int kCachedZeros = 2048;
constexpr int kEulerTerms = 24;
constexpr int kMaxLobes = 400000;

const std::vector<double>& j0_zeros() {
  static const std::vector<double> zeros = [] {
    std::vector<double> z(kCachedZeros);
    for (int k = 1; k <= kCachedZeros; ++k) z[k - 1] = boost::math::cyl_bessel_j_zero(0.0, k);
    return z;
  }();
  return zeros;
}

std::vector<double> breakpoints(double a, double b, std::span<const double> scales) {
  std::vector<double> pts{a, b};
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) continue;
    for (double p : {s / 4.0, s, 4.0 * s}) {
      if (p > a && p < b) pts.push_back(p);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> refined{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double lo = refined.back();
    const double hi = pts[i];
    if (lo > 0.0) {
      while (hi / lo > 4.0) {
        lo *= 4.0;
        refined.push_back(lo);
      }
    }
    refined.push_back(hi);
  }
  return refined;
}

}  // namespace

double gk(const Integrand& f, double a, double b, const Options& opt, double* err) {
  if (a == b) {
    if (err) *err = 0.0;
    return 0.0;
  }
  double error = 0.0;
  double l1 = 0.0;
  const double value = GK::integrate(f, a, b, opt.max_depth, opt.rel, &error, &l1);
  if (err) *err = error;
  if (!std::isfinite(value)) throw InvariantViolation("quadrature produced a non-finite value");
  return value;
}

double segmented(const Integrand& f, double a, double b, std::span<const double> scales,
                 const Options& opt) {
  const auto pts = breakpoints(a, b, scales);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (i == 0 && opt.singular_at_zero && pts[0] == 0.0) {
      boost::math::quadrature::tanh_sinh<double> ts;
      // Integrable endpoint singularity: samples that underflow to the origin carry no mass.
      const auto guarded = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : 0.0;
      };
      total += ts.integrate(guarded, pts[0], pts[1], opt.rel);
    } else {
      total += gk(f, pts[i], pts[i + 1], opt);
    }
  }
  return total;
}

double to_infinity(const Integrand& f, double a, std::span<const double> scales, const Options& opt) {
  double smax = std::max(a, 1.0);
  for (double s : scales) {
    if (std::isfinite(s)) smax = std::max(smax, s);
  }
  const double cut = 16.0 * smax;
  const double head = segmented(f, a, cut, scales, opt);
  double error = 0.0;
  double l1 = 0.0;
  const double tail = GK::integrate(f, cut, std::numeric_limits<double>::infinity(), opt.max_depth,
                                    opt.rel, &error, &l1);
  if (!std::isfinite(tail)) throw InvariantViolation("quadrature tail produced a non-finite value");
  return head + tail;
}

double kernel_zero(Kernel kernel, int k) {
  if (kernel == Kernel::Sinc) return k * M_PI;
  if (k <= kCachedZeros) return j0_zeros()[k - 1];
  // McMahon expansion, accurate far beyond double precision this deep.
  const double beta = (k - 0.25) * M_PI;
  const double b2 = beta * beta;
  return beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta * b2) + 3779.0 / (15360.0 * beta * b2 * b2);
}

double kernel_value(Kernel kernel, double x) {
  if (kernel == Kernel::J0) return boost::math::cyl_bessel_j(0, x);
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double one_minus_j0(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 0.25) {
    // Alternating series; the next term is below 1e-17 relative here.
    return x2 / 4.0 * (1.0 - x2 / 16.0 * (1.0 - x2 / 36.0 * (1.0 - x2 / 64.0 * (1.0 - x2 / 100.0))));
  }
  return 1.0 - boost::math::cyl_bessel_j(0, x);
}

double oscillatory(const Integrand& f, Kernel kernel, double r, double a,
                   std::span<const double> scales, const Options& opt) {
  if (r == 0.0) return to_infinity(f, a, scales, opt);
  const auto weighted = [&](double k) { return f(k) * kernel_value(kernel, k * r); };

  double smax = 0.0;
  for (double s : scales) {
    if (std::isfinite(s)) smax = std::max(smax, s);
  }
  const double smooth_from = 2.0 * smax;

  int m = 1;
  while (kernel_zero(kernel, m) / r <= a) ++m;
  double sum = segmented(weighted, a, kernel_zero(kernel, m) / r, scales, opt);

  std::vector<double> partial;
  int quiet = 0;
  for (int lobes = 0; lobes < kMaxLobes; ++lobes, ++m) {
    const double lo = kernel_zero(kernel, m) / r;
    const double hi = kernel_zero(kernel, m + 1) / r;
    const double lobe = gk(weighted, lo, hi, opt);
    sum += lobe;
    if (std::abs(lobe) <= opt.abs + 1e-16 * std::abs(sum)) {
      if (++quiet >= 3) return sum;
    } else {
      quiet = 0;
    }
    if (lo >= smooth_from) {
      partial.push_back(sum);
      if (static_cast<int>(partial.size()) == kEulerTerms) {
        for (int level = 1; level < kEulerTerms; ++level) {
          for (int i = 0; i + level < kEulerTerms; ++i) partial[i] = 0.5 * (partial[i] + partial[i + 1]);
        }
        return partial[0];
      }
    }
  }
  throw InvariantViolation("oscillatory quadrature did not converge");
}

}  // namespace beamwave::quad
