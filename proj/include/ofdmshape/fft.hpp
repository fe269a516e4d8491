#pragma once

#include <complex>
#include <memory>
#include <span>

namespace ofdmshape {

enum class FftDirection {
  Forward,   ///< X[m] = sum_n x[n] e^{-j 2 pi m n / n_fft}
  Backward,  ///< x[n] = sum_m X[m] e^{+j 2 pi m n / n_fft}, unnormalized
};

/// In-place complex FFT of a fixed size backed by an FFTW plan. Plans are
/// built with FFTW_ESTIMATE so results are bit-reproducible across runs. Not
/// thread-safe: give each worker its own instance.
class Fft {
 public:
  Fft(int size, FftDirection direction);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const noexcept { return size_; }

  /// Transforms `data` (length size()) in place.
  void execute(std::span<std::complex<double>> data) const;

 private:
  struct Plan;
  int size_ = 0;
  std::unique_ptr<Plan> plan_;
};

}  // namespace ofdmshape
