#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace beamwave {

using Complex = std::complex<double>;

/// In-place multidimensional complex FFT (FFTW) over a row-major array.
/// Plans are created once; execution is reentrant, so one Fft may be shared
/// across threads as long as each call works on its own buffer.
class Fft {
 public:
  explicit Fft(std::vector<int> dims);
  Fft(int rank, int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&& other) noexcept;

  /// exp(-i k x) transform, unnormalized.
  void forward(std::span<Complex> data) const;
  /// exp(+i k x) transform, unnormalized.
  void backward(std::span<Complex> data) const;
  std::size_t size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }

 private:
  void release();

  std::vector<int> dims_;
  std::size_t size_ = 0;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace beamwave
