#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ofdmshape/core.hpp"
#include "ofdmshape/fft.hpp"

namespace ofdmshape {

enum class ShaperKind { Baseline, Aic, Precoder, Ast, AicAst };

const char* to_string(ShaperKind kind);
ShaperKind parse_shaper_kind(const std::string& name);

/// Measured realness of a solution.
struct RealnessCertificate {
  /// max |Im c| over the AIC / precoder coefficients, relative to the largest
  /// coefficient magnitude.
  double coefficient_imag = 0.0;
  /// max |t[m] - conj(t[L-1-m])| over the transition pulses, relative to the
  /// largest transition sample; zero iff every transition is
  /// conjugate-symmetric about the pulse centre.
  double transition_asymmetry = 0.0;
  /// Set when the solution was found real and truncated to its real part.
  bool real = false;

  double value() const { return std::max(coefficient_imag, transition_asymmetry); }
};

inline constexpr double kRealnessThreshold = 1e-9;

/// Output of a spectral shaping method. Each column ("stream") is one
/// modulating symbol sequence; for AIC, AST and the LS precoders the stream is
/// tied to a data carrier, for orthogonal precoders it is not.
struct ShaperSolution {
  ShaperKind kind = ShaperKind::Baseline;
  PulseKind pulse_kind = PulseKind::Conventional;
  int fft_size = 0;
  int length = 0;  ///< pulse length L
  int beta = 0;

  std::vector<int> streams;  ///< carrier of each stream, -1 when not tied to one
  std::vector<int> active;   ///< precoder rows (Precoder kind)
  std::vector<int> cancel;   ///< AIC rows (Aic / AicAst kinds)

  Eigen::MatrixXcd precoder;     ///< |active| x |streams|
  Eigen::MatrixXcd aic;          ///< |cancel| x |streams|, g_{i,k}
  Eigen::MatrixXcd transitions;  ///< 2 beta x |streams|, see transition_support()

  int real_unknowns = 0;  ///< real unknowns per stream in the optimization
  RealnessCertificate realness;
  std::vector<std::string> notes;
  /// Solver-specific scalars (leakage, multiplier, ...); not serialized.
  std::map<std::string, double> diagnostics;

  int stream_count() const noexcept { return static_cast<int>(streams.size()); }
  bool has_aic() const noexcept { return kind == ShaperKind::Aic || kind == ShaperKind::AicAst; }
  bool has_transitions() const noexcept { return kind == ShaperKind::Ast || kind == ShaperKind::AicAst; }

  /// Carriers indexing the rows of carrier_matrix().
  std::vector<int> carriers() const;

  /// Carrier amplitudes per stream, |carriers()| x |streams| (identity
  /// embedded for AIC, AST and baseline solutions).
  Eigen::MatrixXcd carrier_matrix() const;

  /// Throws DimensionMismatch when the populated fields do not match `kind`.
  void check() const;
};

/// Stored pulse indices where a transition pulse may be non-zero:
/// {0..beta-1} followed by {L-beta..L-1}.
std::vector<int> transition_support(int length, int beta);

ShaperSolution baseline_solution(const SystemConfig& cfg, std::span<const int> data, PulseKind kind);

RealnessCertificate measure_realness(const ShaperSolution& sol);

/// Recomputes the certificate; when it is below `threshold` the coefficients
/// are replaced by their real parts (and transitions by their
/// conjugate-symmetric part) and the certificate is flagged real.
void certify(ShaperSolution& sol, double threshold = kRealnessThreshold);

/// Builds composite time-domain pulses h_k = P_K g_k + t_k, stored-index
/// aligned with the family's pulses. Owns an N-point FFT; one per worker.
class CompositeBuilder {
 public:
  CompositeBuilder(const PulseFamily& family, const ShaperSolution& sol);

  int length() const noexcept { return length_; }

  /// Writes stream `s` into `out` (length L).
  void column(int s, std::span<cplx> out) const;

 private:
  const PulseFamily* family_;
  const ShaperSolution* sol_;
  std::vector<int> carriers_;
  Eigen::MatrixXcd amplitudes_;
  std::vector<int> support_;
  int length_;
  Fft ifft_;
  mutable std::vector<cplx> scratch_;
};

/// Direct composition from stored pulse samples: H_D as an L x |streams|
/// matrix.
Eigen::MatrixXcd composite_matrix(const PulseBank& bank, const ShaperSolution& sol);

/// Text serialization: header lines `key=value`, then `[section]` blocks of
/// `i,k,re,im` rows (i: row carrier or support index, k: stream index).
void write_solution(std::ostream& out, const ShaperSolution& sol);
ShaperSolution read_solution(std::istream& in);

}  // namespace ofdmshape
