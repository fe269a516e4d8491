#include "ofdmshape/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <vector>

#include "ofdmshape/errors.hpp"

namespace ofdmshape {

struct Fft::Plan {
  fftw_plan plan = nullptr;
  fftw_complex* buffer = nullptr;

  ~Plan() {
    if (plan) fftw_destroy_plan(plan);
    if (buffer) fftw_free(buffer);
  }
};

Fft::Fft(int size, FftDirection direction) : size_(size), plan_(std::make_unique<Plan>()) {
  if (size < 1) throw InvalidConfig("FFT size must be positive");
  plan_->buffer = fftw_alloc_complex(static_cast<std::size_t>(size));
  plan_->plan = fftw_plan_dft_1d(size, plan_->buffer, plan_->buffer,
                                 direction == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  if (!plan_->plan) throw Error("FFTW failed to create a plan of size " + std::to_string(size));
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::execute(std::span<std::complex<double>> data) const {
  if (static_cast<int>(data.size()) != size_) {
    throw DimensionMismatch("FFT input of length " + std::to_string(data.size()) + ", plan size " +
                            std::to_string(size_));
  }
  // Run on the plan's aligned buffer so alignment never differs between calls.
  auto* buf = reinterpret_cast<std::complex<double>*>(plan_->buffer);
  std::copy(data.begin(), data.end(), buf);
  fftw_execute(plan_->plan);
  std::copy(buf, buf + size_, data.begin());
}

}  // namespace ofdmshape
