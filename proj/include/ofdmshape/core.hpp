#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ofdmshape/errors.hpp"

namespace ofdmshape {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class PulseKind { Conventional, Hermitian };
enum class WindowShape { Rectangular, RaisedCosine };

/// What to do when N + N_GI + beta is even.
enum class ParityPolicy {
  ForceOdd,  ///< extend beta by one sample and record a note
  Keep,      ///< keep the even length (conventional pulses only)
};

const char* to_string(PulseKind kind);
PulseKind parse_pulse_kind(const std::string& name);
const char* to_string(WindowShape shape);
WindowShape parse_window_shape(const std::string& name);

/// Scalar system parameters, all in samples.
struct SystemConfig {
  int fft_size = 0;  ///< N
  int guard = 0;     ///< N_GI
  int beta = 0;      ///< transition length
  std::vector<std::string> notes;

  static SystemConfig make(int fft_size, int guard, int beta,
                           ParityPolicy parity = ParityPolicy::ForceOdd);

  int symbol_period() const noexcept { return fft_size + guard; }
  int length() const noexcept { return fft_size + guard + beta; }
  bool odd_length() const noexcept { return length() % 2 == 1; }

  /// eta = (L - 1) / 2; requires odd L.
  int center() const;

  /// Right circular shift that moves the phase origin of the IDFT output to
  /// the central pulse sample: (N - N_GI + beta - 1) / 2 = eta - N_GI.
  int cyclic_shift() const;

  void validate() const;
};

/// Data carriers D and redundant (cancellation) carriers C.
struct CarrierSets {
  std::vector<int> data;
  std::vector<int> cancel;

  /// K = D u C in ascending carrier order.
  std::vector<int> active() const;

  /// Throws InvalidConfig on overlap, duplicates or out-of-range indices.
  void validate(int fft_size) const;
};

/// Per-carrier symbol variance; carriers without an entry use the default.
struct PowerAllocation {
  double default_variance = 1.0;
  std::map<int, double> variance;

  double of(int carrier) const;
  void validate(std::span<const int> carriers) const;
};

struct Window {
  std::vector<double> samples;
  int beta = 0;
  WindowShape shape = WindowShape::RaisedCosine;

  int length() const noexcept { return static_cast<int>(samples.size()); }
};

/// Raised-cosine transitions use w(n) = (1 - cos(pi (n+1)/(beta+1))) / 2 for
/// n < beta, mirrored at the tail; the rectangular shape is all ones over L.
Window make_window(const SystemConfig& cfg, WindowShape shape);

struct Pulse {
  int carrier = 0;
  PulseKind kind = PulseKind::Conventional;
  std::vector<cplx> samples;
  /// Time index of samples[0]: 0 for conventional pulses, -eta for Hermitian.
  int time_offset = 0;
};

Pulse conventional_pulse(const SystemConfig& cfg, const Window& win, int k);
Pulse hermitian_pulse(const SystemConfig& cfg, const Window& win, int k);

/// DTFT of the pulse at normalized frequency f, with the time offset applied,
/// so that Hermitian pulses evaluate to real values. f is wrapped into
/// [-1/2, 1/2).
cplx spectrum_at(const Pulse& p, double f);

double wrap_frequency(double f);

/// Carrier-index modulo arithmetic for exact phase reduction.
inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

/// A pulse family: one window, one pulse kind, any carrier. Spectra come from
/// the window transform and the modulation theorem, so nothing is cached.
class PulseFamily {
 public:
  PulseFamily(SystemConfig cfg, Window win, PulseKind kind);

  const SystemConfig& config() const noexcept { return cfg_; }
  const Window& window() const noexcept { return win_; }
  PulseKind kind() const noexcept { return kind_; }
  int length() const noexcept { return cfg_.length(); }

  Pulse pulse(int k) const;

  /// Stored sample index that carries zero carrier phase: N_GI for
  /// conventional pulses, eta for Hermitian ones.
  int phase_reference() const noexcept { return phase_ref_; }

  /// Time index of stored sample 0.
  int time_offset() const noexcept { return time_offset_; }

  /// Real, zero-phase window transform sum_n w(n) cos(2 pi nu (n - c)) with
  /// c = (L - 1) / 2.
  double window_transform(double nu) const;

  /// P_k(f) evaluated via the window transform.
  cplx spectrum(int k, double f) const;

 private:
  SystemConfig cfg_;
  Window win_;
  PulseKind kind_;
  int phase_ref_ = 0;
  int time_offset_ = 0;
};

/// Precomputed pulses for a fixed carrier list.
class PulseBank {
 public:
  PulseBank(const PulseFamily& family, std::span<const int> carriers);

  PulseKind kind() const noexcept { return kind_; }
  const Pulse& at(int carrier) const;
  bool contains(int carrier) const { return index_.count(carrier) != 0; }
  const std::vector<Pulse>& pulses() const noexcept { return pulses_; }

 private:
  PulseKind kind_;
  std::vector<Pulse> pulses_;
  std::map<int, std::size_t> index_;
};

}  // namespace ofdmshape
