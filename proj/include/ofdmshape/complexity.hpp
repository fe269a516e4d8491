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

enum class ComplexityMethod { Aic, Precoding, AstRegular, AstHarmonic };

const char* to_string(ComplexityMethod m);
ComplexityMethod parse_complexity_method(const std::string& name);

/// Real products per OFDM symbol, shaping overhead only.
struct ComplexityDims {
  int data = 0;       ///< |D|
  int cancel = 0;     ///< |C|
  int active = 0;     ///< |K|
  int beta = 0;
  int harmonics = 0;  ///< b
};

/// Smallest power of two >= beta.
int harmonic_fft_size(int beta);

struct SymbolicCount {
  std::uint64_t conventional = 0;
  std::uint64_t hermitian = 0;

  /// 1 - hermitian / conventional, 0 when both are zero.
  double reduction() const;
};

SymbolicCount symbolic_count(ComplexityMethod method, const ComplexityDims& dims);

/// Counts real multiplications performed through CountedReal / CountedComplex.
class OpCounter {
 public:
  void add(std::uint64_t n) noexcept { products_ += n; }
  std::uint64_t products() const noexcept { return products_; }
  void reset() noexcept { products_ = 0; }

 private:
  std::uint64_t products_ = 0;
};

struct CountedComplex;

struct CountedReal {
  double v = 0.0;
  OpCounter* ctr = nullptr;
};

struct CountedComplex {
  cplx v{};
  OpCounter* ctr = nullptr;
};

CountedReal operator*(CountedReal a, CountedReal b);
CountedComplex operator*(CountedReal a, CountedComplex b);
CountedComplex operator*(CountedComplex a, CountedReal b);
CountedComplex operator*(CountedComplex a, CountedComplex b);
CountedComplex operator+(CountedComplex a, CountedComplex b);
CountedComplex operator-(CountedComplex a, CountedComplex b);

/// {a b, a conj(b)} from the four cross products of the operands.
std::pair<CountedComplex, CountedComplex> times_conjugate_pair(CountedComplex a, CountedComplex b);

/// Transition pulses expanded on b harmonics e^{j 2 pi l (n - c0) / F},
/// n = 0..beta-1 over each taper region, c0 = (beta - 1) / 2.
struct HarmonicTransitions {
  int beta = 0;
  int fft_size = 0;       ///< F
  std::vector<int> harmonics;
  Eigen::MatrixXcd head;  ///< b x |streams|
  Eigen::MatrixXcd tail;  ///< b x |streams|
  bool conjugate_pair = false;  ///< tail == conj(head)
};

/// Least-squares fit of the solution's transitions on harmonics
/// l = -(b/2) .. b - 1 - b/2. Hermitian solutions with a real certificate
/// get tail = conj(head) exactly.
HarmonicTransitions fit_harmonic_transitions(const ShaperSolution& sol, int harmonics);

/// Time-domain taper samples of `ht` for one symbol (length 2 beta), the same
/// values the counted hot path produces.
Eigen::VectorXcd evaluate_harmonic_transitions(const HarmonicTransitions& ht, const Eigen::VectorXcd& d);

struct MeasuredCount {
  std::uint64_t products = 0;
  Eigen::VectorXcd output;  ///< hot-path result, for value checks
  bool real_path = false;
};

/// Runs one symbol of the method's hot path through counted arithmetic. The
/// real path is taken when the solution's realness certificate is flagged.
MeasuredCount measured_count(ComplexityMethod method, const ShaperSolution& sol, const Eigen::VectorXcd& d);
MeasuredCount measured_count(const HarmonicTransitions& ht, const Eigen::VectorXcd& d);

struct ComplexityReport {
  std::string method;
  PulseKind pulse_kind = PulseKind::Conventional;
  std::uint64_t symbolic = 0;
  std::optional<std::uint64_t> measured;
  double reduction = 0.0;

  bool consistent() const { return measured && *measured == symbolic; }
};

/// CSV with header `method,pulse_kind,symbolic,measured,reduction_pct`.
void write_complexity_csv(std::ostream& out, std::span<const ComplexityReport> rows);

}  // namespace ofdmshape
