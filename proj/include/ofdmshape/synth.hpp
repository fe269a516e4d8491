#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ofdmshape/core.hpp"
#include "ofdmshape/solution.hpp"

namespace ofdmshape {

enum class Constellation { Qpsk, Qam16, UnitRandom };

const char* to_string(Constellation c);
Constellation parse_constellation(const std::string& name);

/// Modulating symbols: row s feeds solution stream s, column u is symbol u.
struct SymbolStream {
  Eigen::MatrixXcd data;
  Constellation constellation = Constellation::UnitRandom;

  int streams() const noexcept { return static_cast<int>(data.rows()); }
  int symbols() const noexcept { return static_cast<int>(data.cols()); }
};

/// Random symbols scaled so that E|d|^2 matches each stream's variance.
SymbolStream random_symbols(const ShaperSolution& sol, const PowerAllocation& power, int symbols,
                            Constellation constellation, std::uint64_t seed);

struct Waveform {
  std::vector<cplx> samples;  ///< U N_s + beta samples
  int symbol_period = 0;
  int symbols = 0;
  int beta = 0;
};

/// x(n) = sum_u H d(u) placed at u N_s; consecutive symbols overlap by beta.
Waveform synthesize(const PulseFamily& family, const ShaperSolution& sol, const SymbolStream& stream);

/// Hermitian transmitter built from an ordinary IDFT: real carrier matrix,
/// N-point IDFT, right circular shift by eta - N_GI, cyclic-prefix extension
/// to L samples, windowing, overlap-add.
Waveform synthesize_fast_hermitian(const PulseFamily& family, const ShaperSolution& sol, const SymbolStream& stream);

/// y[n] = x[(n - shift) mod N].
void circular_shift_right(std::span<const cplx> in, int shift, std::span<cplx> out);

enum class ShiftCompensation { Explicit, Feq };

ShiftCompensation parse_shift_compensation(const std::string& name);

struct LoopbackResult {
  SymbolStream symbols;
  Eigen::MatrixXcd amplitudes;  ///< recovered carrier_matrix() d(u)
  Eigen::VectorXcd taps;        ///< FEQ taps on carriers(), Feq mode only
};

/// Ideal-channel receiver: DFT over stored samples [N_GI, N_s) of every
/// symbol, shift compensation, then the decoder implied by the solution
/// (data-carrier selection, G^H for orthonormal G, pseudo-inverse otherwise).
/// Feq mode estimates one tap per carrier from `pilot` = d(0).
LoopbackResult loopback_receive(const PulseFamily& family, const ShaperSolution& sol, const Waveform& wf,
                                ShiftCompensation mode, const std::optional<Eigen::VectorXcd>& pilot = std::nullopt);

/// One `re,im` line per sample.
void write_waveform_csv(std::ostream& out, const Waveform& wf);
/// Interleaved little-endian float64 pairs.
void write_waveform_raw(std::ostream& out, const Waveform& wf);

}  // namespace ofdmshape
