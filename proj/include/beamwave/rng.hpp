#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace beamwave {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stream tags so different consumers of one realization never share draws.
enum class Purpose : std::uint32_t {
  Synthesis = 1,
  WhiteNoise = 2,
  Resample = 3,
  Test = 99,
};

/// Uniform random bit generator over the Philox stream identified by
/// (seed, realization, purpose). Streams are independent of evaluation order,
/// so realizations can be generated in any order or in parallel.
class StreamRng {
 public:
  using result_type = std::uint32_t;

  StreamRng(std::uint64_t seed, std::uint64_t realization, Purpose purpose);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  double normal() { return normal_(*this); }
  double uniform() { return uniform_(*this); }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace beamwave
