#include "beamwave/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace beamwave {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Fft(std::vector<int> dims) : dims_(std::move(dims)) {
  size_ = 1;
  for (int d : dims_) size_ *= static_cast<std::size_t>(d);
  std::vector<Complex> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, FFTW_BACKWARD, flags);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
}

Fft::Fft(int rank, int n) : Fft(std::vector<int>(static_cast<std::size_t>(rank), n)) {}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : dims_(std::move(other.dims_)), size_(other.size_), forward_(other.forward_), backward_(other.backward_) {
  other.forward_ = nullptr;
  other.backward_ = nullptr;
}

Fft& Fft::operator=(Fft&& other) noexcept {
  if (this != &other) {
    release();
    dims_ = std::move(other.dims_);
    size_ = other.size_;
    forward_ = other.forward_;
    backward_ = other.backward_;
    other.forward_ = nullptr;
    other.backward_ = nullptr;
  }
  return *this;
}

void Fft::release() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  forward_ = backward_ = nullptr;
}

void Fft::forward(std::span<Complex> data) const {
  if (data.size() != size_) throw std::invalid_argument("FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_), buf, buf);
}

void Fft::backward(std::span<Complex> data) const {
  if (data.size() != size_) throw std::invalid_argument("FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), buf, buf);
}

}  // namespace beamwave
