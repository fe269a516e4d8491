#include "ofdmshape/complexity.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace ofdmshape {

const char* to_string(ComplexityMethod m) {
  switch (m) {
    case ComplexityMethod::Aic: return "aic";
    case ComplexityMethod::Precoding: return "precoding";
    case ComplexityMethod::AstRegular: return "ast_regular";
    case ComplexityMethod::AstHarmonic: return "ast_harmonic";
  }
  return "?";
}

ComplexityMethod parse_complexity_method(const std::string& name) {
  if (name == "aic") return ComplexityMethod::Aic;
  if (name == "precoding") return ComplexityMethod::Precoding;
  if (name == "ast_regular") return ComplexityMethod::AstRegular;
  if (name == "ast_harmonic") return ComplexityMethod::AstHarmonic;
  throw InvalidConfig("unknown complexity method '" + name + "'");
}

int harmonic_fft_size(int beta) {
  if (beta < 1) throw InvalidConfig("harmonic transitions need beta >= 1");
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(beta)));
}

double SymbolicCount::reduction() const {
  if (conventional == 0) return 0.0;
  return 1.0 - static_cast<double>(hermitian) / static_cast<double>(conventional);
}

SymbolicCount symbolic_count(ComplexityMethod method, const ComplexityDims& d) {
  if (d.data < 0 || d.cancel < 0 || d.active < 0 || d.beta < 0 || d.harmonics < 0) {
    throw InvalidConfig("complexity parameters must be non-negative");
  }
  const auto D = static_cast<std::uint64_t>(d.data);
  SymbolicCount c;
  switch (method) {
    case ComplexityMethod::Aic:
      c.conventional = 4 * D * static_cast<std::uint64_t>(d.cancel);
      c.hermitian = 2 * D * static_cast<std::uint64_t>(d.cancel);
      break;
    case ComplexityMethod::Precoding:
      c.conventional = 4 * static_cast<std::uint64_t>(d.active) * D;
      c.hermitian = 2 * static_cast<std::uint64_t>(d.active) * D;
      break;
    case ComplexityMethod::AstRegular:
      c.conventional = 8 * static_cast<std::uint64_t>(d.beta) * D;
      c.hermitian = 4 * static_cast<std::uint64_t>(d.beta) * D;
      break;
    case ComplexityMethod::AstHarmonic: {
      const auto F = static_cast<std::uint64_t>(harmonic_fft_size(d.beta));
      const auto fft = 2 * F * static_cast<std::uint64_t>(std::countr_zero(F));
      const auto b = static_cast<std::uint64_t>(d.harmonics);
      c.conventional = 8 * D * b + fft;
      c.hermitian = 4 * D * b + fft;
      break;
    }
  }
  return c;
}

namespace {

OpCounter* pick(OpCounter* a, OpCounter* b) { return a ? a : b; }

void bump(OpCounter* c, std::uint64_t n) {
  if (c) c->add(n);
}

}  // namespace

CountedReal operator*(CountedReal a, CountedReal b) {
  OpCounter* c = pick(a.ctr, b.ctr);
  bump(c, 1);
  return {a.v * b.v, c};
}

CountedComplex operator*(CountedReal a, CountedComplex b) {
  OpCounter* c = pick(a.ctr, b.ctr);
  bump(c, 2);
  return {{a.v * b.v.real(), a.v * b.v.imag()}, c};
}

CountedComplex operator*(CountedComplex a, CountedReal b) { return b * a; }

CountedComplex operator*(CountedComplex a, CountedComplex b) {
  OpCounter* c = pick(a.ctr, b.ctr);
  bump(c, 4);
  const double rr = a.v.real() * b.v.real(), ii = a.v.imag() * b.v.imag();
  const double ri = a.v.real() * b.v.imag(), ir = a.v.imag() * b.v.real();
  return {{rr - ii, ri + ir}, c};
}

CountedComplex operator+(CountedComplex a, CountedComplex b) { return {a.v + b.v, pick(a.ctr, b.ctr)}; }
CountedComplex operator-(CountedComplex a, CountedComplex b) { return {a.v - b.v, pick(a.ctr, b.ctr)}; }

std::pair<CountedComplex, CountedComplex> times_conjugate_pair(CountedComplex a, CountedComplex b) {
  OpCounter* c = pick(a.ctr, b.ctr);
  bump(c, 4);
  const double rr = a.v.real() * b.v.real(), ii = a.v.imag() * b.v.imag();
  const double ri = a.v.real() * b.v.imag(), ir = a.v.imag() * b.v.real();
  return {CountedComplex{{rr - ii, ri + ir}, c}, CountedComplex{{rr + ii, ir - ri}, c}};
}

namespace {

std::vector<CountedComplex> counted(const Eigen::VectorXcd& d, OpCounter* c) {
  std::vector<CountedComplex> out(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) out[static_cast<std::size_t>(i)] = {d(i), c};
  return out;
}

Eigen::VectorXcd values(const std::vector<CountedComplex>& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].v;
  return out;
}

/// y = M d with complex or real-valued coefficients.
MeasuredCount matrix_product(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& d, bool real_path) {
  if (M.cols() != d.size()) throw DimensionMismatch("symbol vector length does not match the solution streams");
  OpCounter ctr;
  const auto x = counted(d, &ctr);
  std::vector<CountedComplex> y(static_cast<std::size_t>(M.rows()), CountedComplex{{}, &ctr});
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    CountedComplex acc{{}, &ctr};
    for (Eigen::Index s = 0; s < M.cols(); ++s) {
      if (real_path) {
        acc = acc + CountedReal{M(r, s).real(), &ctr} * x[static_cast<std::size_t>(s)];
      } else {
        acc = acc + CountedComplex{M(r, s), &ctr} * x[static_cast<std::size_t>(s)];
      }
    }
    y[static_cast<std::size_t>(r)] = acc;
  }
  return {ctr.products(), values(y), real_path};
}

/// Taper samples sum_s t_s d_s; conjugate-symmetric transitions are
/// evaluated pairwise.
MeasuredCount transition_product(const ShaperSolution& sol, const Eigen::VectorXcd& d, bool real_path) {
  const Eigen::MatrixXcd& T = sol.transitions;
  if (T.cols() != d.size()) throw DimensionMismatch("symbol vector length does not match the solution streams");
  const int beta = sol.beta;
  OpCounter ctr;
  const auto x = counted(d, &ctr);
  std::vector<CountedComplex> y(static_cast<std::size_t>(2 * beta), CountedComplex{{}, &ctr});
  for (Eigen::Index s = 0; s < T.cols(); ++s) {
    const CountedComplex ds = x[static_cast<std::size_t>(s)];
    if (real_path) {
      for (int p = 0; p < beta; ++p) {
        const auto [head, tail] = times_conjugate_pair(ds, CountedComplex{T(p, s), &ctr});
        y[static_cast<std::size_t>(p)] = y[static_cast<std::size_t>(p)] + head;
        y[static_cast<std::size_t>(2 * beta - 1 - p)] = y[static_cast<std::size_t>(2 * beta - 1 - p)] + tail;
      }
    } else {
      for (int r = 0; r < 2 * beta; ++r) {
        y[static_cast<std::size_t>(r)] = y[static_cast<std::size_t>(r)] + CountedComplex{T(r, s), &ctr} * ds;
      }
    }
  }
  return {ctr.products(), values(y), real_path};
}

/// In-place radix-2 backward FFT; every butterfly twiddle is one complex
/// product.
void counted_fft(std::vector<CountedComplex>& a, OpCounter* ctr) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    for (std::size_t k = 0; k < len / 2; ++k) {
      const double ang = kTwoPi * static_cast<double>(k) / static_cast<double>(len);
      const CountedComplex w{{std::cos(ang), std::sin(ang)}, ctr};
      for (std::size_t i = 0; i < n; i += len) {
        const CountedComplex u = a[i + k];
        const CountedComplex v = w * a[i + k + len / 2];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

int harmonic_center(int beta) {
  if (beta % 2 == 0) throw PreconditionViolation("harmonic transitions need an odd beta, got " + std::to_string(beta));
  return (beta - 1) / 2;
}

Eigen::MatrixXcd harmonic_basis(const HarmonicTransitions& ht) {
  const int c0 = harmonic_center(ht.beta);
  Eigen::MatrixXcd B(ht.beta, static_cast<Eigen::Index>(ht.harmonics.size()));
  for (int n = 0; n < ht.beta; ++n) {
    for (std::size_t l = 0; l < ht.harmonics.size(); ++l) {
      const std::int64_t r = mod_floor(static_cast<std::int64_t>(ht.harmonics[l]) * (n - c0), ht.fft_size);
      const double ang = kTwoPi * static_cast<double>(r) / ht.fft_size;
      B(n, static_cast<Eigen::Index>(l)) = {std::cos(ang), std::sin(ang)};
    }
  }
  return B;
}

}  // namespace

HarmonicTransitions fit_harmonic_transitions(const ShaperSolution& sol, int harmonics) {
  if (!sol.has_transitions()) throw PreconditionViolation("solution has no transitions");
  HarmonicTransitions ht;
  ht.beta = sol.beta;
  ht.fft_size = harmonic_fft_size(sol.beta);
  if (harmonics < 1 || harmonics > ht.fft_size) {
    throw InvalidConfig("harmonic count must lie in [1, " + std::to_string(ht.fft_size) + "]");
  }
  for (int l = 0; l < harmonics; ++l) ht.harmonics.push_back(l - harmonics / 2);
  const Eigen::MatrixXcd B = harmonic_basis(ht);
  const auto qr = B.colPivHouseholderQr();
  ht.head = qr.solve(sol.transitions.topRows(sol.beta));
  ht.conjugate_pair = sol.pulse_kind == PulseKind::Hermitian && sol.realness.real;
  ht.tail = ht.conjugate_pair ? Eigen::MatrixXcd(ht.head.conjugate()) : Eigen::MatrixXcd(qr.solve(sol.transitions.bottomRows(sol.beta)));
  return ht;
}

Eigen::VectorXcd evaluate_harmonic_transitions(const HarmonicTransitions& ht, const Eigen::VectorXcd& d) {
  const Eigen::MatrixXcd B = harmonic_basis(ht);
  Eigen::VectorXcd out(2 * ht.beta);
  out.head(ht.beta) = B * (ht.head * d);
  out.tail(ht.beta) = B * (ht.tail * d);
  return out;
}

MeasuredCount measured_count(const HarmonicTransitions& ht, const Eigen::VectorXcd& d) {
  const int c0 = harmonic_center(ht.beta);
  if (ht.head.cols() != d.size()) throw DimensionMismatch("symbol vector length does not match the solution streams");
  const auto b = static_cast<Eigen::Index>(ht.harmonics.size());
  OpCounter ctr;
  const auto x = counted(d, &ctr);
  std::vector<CountedComplex> head(static_cast<std::size_t>(b), CountedComplex{{}, &ctr}), tail = head;
  for (Eigen::Index s = 0; s < d.size(); ++s) {
    const CountedComplex ds = x[static_cast<std::size_t>(s)];
    for (Eigen::Index l = 0; l < b; ++l) {
      if (ht.conjugate_pair) {
        const auto [h, t] = times_conjugate_pair(ds, CountedComplex{ht.head(l, s), &ctr});
        head[static_cast<std::size_t>(l)] = head[static_cast<std::size_t>(l)] + h;
        tail[static_cast<std::size_t>(l)] = tail[static_cast<std::size_t>(l)] + t;
      } else {
        head[static_cast<std::size_t>(l)] = head[static_cast<std::size_t>(l)] + CountedComplex{ht.head(l, s), &ctr} * ds;
        tail[static_cast<std::size_t>(l)] = tail[static_cast<std::size_t>(l)] + CountedComplex{ht.tail(l, s), &ctr} * ds;
      }
    }
  }
  // In steady state a symbol's head and the previous tail share one
  // transform, so only the head transform is counted here.
  auto evaluate = [&](const std::vector<CountedComplex>& coef, OpCounter* c) {
    std::vector<CountedComplex> buf(static_cast<std::size_t>(ht.fft_size), CountedComplex{{}, c});
    for (Eigen::Index l = 0; l < b; ++l) {
      auto& slot = buf[static_cast<std::size_t>(mod_floor(ht.harmonics[static_cast<std::size_t>(l)], ht.fft_size))];
      slot = slot + CountedComplex{coef[static_cast<std::size_t>(l)].v, c};
    }
    counted_fft(buf, c);
    Eigen::VectorXcd out(ht.beta);
    for (int n = 0; n < ht.beta; ++n) out(n) = buf[static_cast<std::size_t>(mod_floor(n - c0, ht.fft_size))].v;
    return out;
  };
  MeasuredCount mc;
  mc.real_path = ht.conjugate_pair;
  mc.output.resize(2 * ht.beta);
  mc.output.head(ht.beta) = evaluate(head, &ctr);
  mc.output.tail(ht.beta) = evaluate(tail, nullptr);
  mc.products = ctr.products();
  return mc;
}

MeasuredCount measured_count(ComplexityMethod method, const ShaperSolution& sol, const Eigen::VectorXcd& d) {
  sol.check();
  const bool real = sol.realness.real;
  switch (method) {
    case ComplexityMethod::Aic:
      if (!sol.has_aic()) throw PreconditionViolation("solution has no cancellation carriers");
      return matrix_product(sol.aic, d, real);
    case ComplexityMethod::Precoding:
      if (sol.kind != ShaperKind::Precoder) throw PreconditionViolation("solution is not a precoder");
      return matrix_product(sol.precoder, d, real);
    case ComplexityMethod::AstRegular:
      if (!sol.has_transitions()) throw PreconditionViolation("solution has no transitions");
      return transition_product(sol, d, real && sol.pulse_kind == PulseKind::Hermitian);
    case ComplexityMethod::AstHarmonic:
      throw PreconditionViolation("harmonic transitions are counted from fit_harmonic_transitions()");
  }
  return {};
}

void write_complexity_csv(std::ostream& out, std::span<const ComplexityReport> rows) {
  out << "method,pulse_kind,symbolic,measured,reduction_pct\n";
  char line[256];
  for (const auto& r : rows) {
    const std::string measured = r.measured ? std::to_string(*r.measured) : std::string();
    std::snprintf(line, sizeof line, "%s,%s,%llu,%s,%.6f\n", r.method.c_str(), to_string(r.pulse_kind),
                  static_cast<unsigned long long>(r.symbolic), measured.c_str(), 100.0 * r.reduction);
    out << line;
  }
}

}  // namespace ofdmshape
