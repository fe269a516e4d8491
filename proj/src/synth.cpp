#include "ofdmshape/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "ofdmshape/fft.hpp"
#include "ofdmshape/spectrum.hpp"

namespace ofdmshape {

const char* to_string(Constellation c) {
  switch (c) {
    case Constellation::Qpsk: return "qpsk";
    case Constellation::Qam16: return "16qam";
    case Constellation::UnitRandom: return "unit-random";
  }
  return "?";
}

Constellation parse_constellation(const std::string& name) {
  if (name == "qpsk") return Constellation::Qpsk;
  if (name == "16qam" || name == "qam16") return Constellation::Qam16;
  if (name == "unit-random" || name == "unit_random") return Constellation::UnitRandom;
  throw InvalidConfig("unknown constellation '" + name + "'");
}

SymbolStream random_symbols(const ShaperSolution& sol, const PowerAllocation& power, int symbols,
                            Constellation constellation, std::uint64_t seed) {
  if (symbols < 0) throw InvalidConfig("negative symbol count");
  const std::vector<double> var = stream_variances(sol, power);
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  SymbolStream st;
  st.constellation = constellation;
  st.data.resize(sol.stream_count(), symbols);
  const double qam = 1.0 / std::sqrt(10.0);
  for (int u = 0; u < symbols; ++u) {
    for (int s = 0; s < sol.stream_count(); ++s) {
      cplx d;
      switch (constellation) {
        case Constellation::Qpsk: {
          const std::uint64_t b = rng() >> 62;
          d = cplx((b & 1) ? 1.0 : -1.0, (b & 2) ? 1.0 : -1.0) * M_SQRT1_2;
          break;
        }
        case Constellation::Qam16: {
          const std::uint64_t b = rng() >> 60;
          const double lv[4] = {-3.0, -1.0, 1.0, 3.0};
          d = cplx(lv[b & 3], lv[(b >> 2) & 3]) * qam;
          break;
        }
        case Constellation::UnitRandom:
          d = std::polar(1.0, kTwoPi * unit());
          break;
      }
      st.data(s, u) = std::sqrt(var[static_cast<std::size_t>(s)]) * d;
    }
  }
  return st;
}

namespace {

void check_inputs(const PulseFamily& family, const ShaperSolution& sol, const SymbolStream& st) {
  sol.check();
  if (sol.length != family.length() || sol.fft_size != family.config().fft_size) {
    throw DimensionMismatch("solution was built for a different system configuration");
  }
  if (sol.pulse_kind != family.kind()) throw PreconditionViolation("solution and pulse family differ in pulse kind");
  if (st.streams() != sol.stream_count()) {
    throw DimensionMismatch("symbol stream has " + std::to_string(st.streams()) + " rows, solution has " +
                            std::to_string(sol.stream_count()) + " streams");
  }
}

Waveform empty_waveform(const SystemConfig& cfg, int symbols) {
  Waveform wf;
  wf.symbol_period = cfg.symbol_period();
  wf.symbols = symbols;
  wf.beta = cfg.beta;
  wf.samples.assign(static_cast<std::size_t>(symbols) * static_cast<std::size_t>(cfg.symbol_period()) +
                        static_cast<std::size_t>(cfg.beta),
                    cplx{});
  return wf;
}

}  // namespace

Waveform synthesize(const PulseFamily& family, const ShaperSolution& sol, const SymbolStream& stream) {
  check_inputs(family, sol, stream);
  const SystemConfig& cfg = family.config();
  Waveform wf = empty_waveform(cfg, stream.symbols());
  const std::vector<int> carriers = sol.carriers();
  const PulseBank bank(family, carriers);
  const Eigen::MatrixXcd H = composite_matrix(bank, sol);
  const int L = family.length();
  const int Ns = cfg.symbol_period();
  constexpr int block = 256;
  for (int u0 = 0; u0 < stream.symbols(); u0 += block) {
    const int nb = std::min(block, stream.symbols() - u0);
    const Eigen::MatrixXcd X = H * stream.data.middleCols(u0, nb);
    for (int j = 0; j < nb; ++j) {
      cplx* dst = wf.samples.data() + static_cast<std::size_t>(u0 + j) * static_cast<std::size_t>(Ns);
      for (int m = 0; m < L; ++m) dst[m] += X(m, j);
    }
  }
  return wf;
}

void circular_shift_right(std::span<const cplx> in, int shift, std::span<cplx> out) {
  if (in.size() != out.size()) throw DimensionMismatch("circular shift buffers differ in length");
  const auto n = static_cast<std::int64_t>(in.size());
  if (n == 0) return;
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(mod_floor(i - shift, n))];
}

Waveform synthesize_fast_hermitian(const PulseFamily& family, const ShaperSolution& sol, const SymbolStream& stream) {
  const SystemConfig& cfg = family.config();
  if (!cfg.odd_length()) {
    throw PreconditionViolation("fast Hermitian synthesis needs an odd pulse length, L = " +
                                std::to_string(cfg.length()));
  }
  if (family.kind() != PulseKind::Hermitian) throw PreconditionViolation("fast path requires Hermitian pulses");
  check_inputs(family, sol, stream);
  const Eigen::MatrixXcd A = sol.carrier_matrix();
  if (A.size() && A.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw PreconditionViolation("fast Hermitian synthesis needs a real carrier matrix; certify the solution first");
  }
  const Eigen::MatrixXd G = A.real();
  const std::vector<int> carriers = sol.carriers();
  const std::vector<int> support =
      sol.has_transitions() ? transition_support(sol.length, sol.beta) : std::vector<int>{};

  const int N = cfg.fft_size, L = cfg.length(), Ns = cfg.symbol_period();
  const int shift = cfg.cyclic_shift();
  const auto& w = family.window().samples;
  Waveform wf = empty_waveform(cfg, stream.symbols());
  Fft ifft(N, FftDirection::Backward);
  std::vector<cplx> bins(static_cast<std::size_t>(N)), shifted(static_cast<std::size_t>(N));
  Eigen::VectorXcd amp(G.rows());

  for (int u = 0; u < stream.symbols(); ++u) {
    const Eigen::VectorXcd d = stream.data.col(u);
    amp.real() = G * d.real();
    amp.imag() = G * d.imag();
    std::fill(bins.begin(), bins.end(), cplx{});
    for (std::size_t r = 0; r < carriers.size(); ++r) bins[static_cast<std::size_t>(carriers[r])] += amp(static_cast<Eigen::Index>(r));
    ifft.execute(bins);
    circular_shift_right(bins, shift, shifted);
    cplx* dst = wf.samples.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(Ns);
    for (int m = 0; m < L; ++m) {
      dst[m] += w[static_cast<std::size_t>(m)] * shifted[static_cast<std::size_t>(mod_floor(m - cfg.guard, N))];
    }
    if (!support.empty()) {
      const Eigen::VectorXcd t = sol.transitions * d;
      for (std::size_t r = 0; r < support.size(); ++r) dst[support[r]] += t(static_cast<Eigen::Index>(r));
    }
  }
  return wf;
}

ShiftCompensation parse_shift_compensation(const std::string& name) {
  if (name == "explicit") return ShiftCompensation::Explicit;
  if (name == "feq") return ShiftCompensation::Feq;
  throw InvalidConfig("unknown shift compensation mode '" + name + "' (expected explicit or feq)");
}

LoopbackResult loopback_receive(const PulseFamily& family, const ShaperSolution& sol, const Waveform& wf,
                                ShiftCompensation mode, const std::optional<Eigen::VectorXcd>& pilot) {
  const SystemConfig& cfg = family.config();
  sol.check();
  if (sol.pulse_kind != family.kind()) throw PreconditionViolation("solution and pulse family differ in pulse kind");
  if (wf.symbol_period != cfg.symbol_period()) throw DimensionMismatch("waveform symbol period");
  if (cfg.beta > cfg.guard) {
    throw PreconditionViolation("beta = " + std::to_string(cfg.beta) + " exceeds the guard interval; symbols overlap the DFT window");
  }
  const int N = cfg.fft_size, Ns = cfg.symbol_period();
  for (int m = cfg.guard; m < Ns; ++m) {
    if (family.window().samples[static_cast<std::size_t>(m)] != 1.0) {
      throw PreconditionViolation("window is not flat over the DFT window");
    }
  }
  const std::vector<int> carriers = sol.carriers();
  const Eigen::MatrixXcd A = sol.carrier_matrix();
  const int shift = family.kind() == PulseKind::Hermitian ? cfg.cyclic_shift() : 0;

  LoopbackResult res;
  res.amplitudes.resize(static_cast<Eigen::Index>(carriers.size()), wf.symbols);
  Fft fft(N, FftDirection::Forward);
  std::vector<cplx> buf(static_cast<std::size_t>(N));
  for (int u = 0; u < wf.symbols; ++u) {
    const cplx* src = wf.samples.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(Ns) +
                      static_cast<std::size_t>(cfg.guard);
    const int s = mode == ShiftCompensation::Explicit ? shift : 0;
    for (int n = 0; n < N; ++n) buf[static_cast<std::size_t>(n)] = src[mod_floor(n + s, N)];
    fft.execute(buf);
    for (std::size_t r = 0; r < carriers.size(); ++r) {
      res.amplitudes(static_cast<Eigen::Index>(r), u) = buf[static_cast<std::size_t>(carriers[r])] / static_cast<double>(N);
    }
  }

  if (mode == ShiftCompensation::Feq) {
    if (!pilot) throw PreconditionViolation("FEQ compensation needs the pilot symbol d(0)");
    if (pilot->size() != sol.stream_count()) throw DimensionMismatch("pilot symbol length");
    if (wf.symbols < 1) throw PreconditionViolation("FEQ compensation needs at least one symbol");
    const Eigen::VectorXcd c = A * *pilot;
    res.taps.resize(c.size());
    for (Eigen::Index r = 0; r < c.size(); ++r) {
      if (!(std::abs(c(r)) > 1e-300)) {
        throw PreconditionViolation("pilot leaves carrier " + std::to_string(carriers[static_cast<std::size_t>(r)]) + " empty");
      }
      res.taps(r) = res.amplitudes(r, 0) / c(r);
    }
    for (int u = 0; u < wf.symbols; ++u) res.amplitudes.col(u).array() /= res.taps.array();
  }

  res.symbols.data.resize(sol.stream_count(), wf.symbols);
  if (sol.kind == ShaperKind::Precoder) {
    const Eigen::MatrixXcd& G = sol.precoder;
    const Eigen::MatrixXcd gram = G.adjoint() * G;
    const double dev = (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).norm();
    if (dev <= 1e-9) {
      res.symbols.data = G.adjoint() * res.amplitudes;
    } else {
      res.symbols.data = G.completeOrthogonalDecomposition().solve(res.amplitudes);
    }
  } else {
    for (int s = 0; s < sol.stream_count(); ++s) {
      const auto it = std::find(carriers.begin(), carriers.end(), sol.streams[static_cast<std::size_t>(s)]);
      res.symbols.data.row(s) = res.amplitudes.row(static_cast<Eigen::Index>(it - carriers.begin()));
    }
  }
  return res;
}

void write_waveform_csv(std::ostream& out, const Waveform& wf) {
  char line[64];
  for (const cplx& v : wf.samples) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", v.real(), v.imag());
    out << line;
  }
}

void write_waveform_raw(std::ostream& out, const Waveform& wf) {
  auto put = [&](double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
  };
  for (const cplx& v : wf.samples) {
    put(v.real());
    put(v.imag());
  }
}

}  // namespace ofdmshape
