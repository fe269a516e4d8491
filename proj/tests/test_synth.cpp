#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "ofdmshape/shapers.hpp"
#include "ofdmshape/synth.hpp"
#include "oracle.hpp"

using namespace ofdmshape;

namespace {

/// Random real AIC + symmetric-transition solution, the shape the fast path accepts.
ShaperSolution random_real_solution(const SystemConfig& cfg, std::mt19937_64& rng, int S, int C) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int N = cfg.fft_size;
  std::vector<int> carriers(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) carriers[static_cast<std::size_t>(i)] = i;
  std::shuffle(carriers.begin(), carriers.end(), rng);
  ShaperSolution s;
  s.kind = ShaperKind::AicAst;
  s.pulse_kind = PulseKind::Hermitian;
  s.fft_size = N;
  s.length = cfg.length();
  s.beta = cfg.beta;
  s.streams.assign(carriers.begin(), carriers.begin() + S);
  s.cancel.assign(carriers.begin() + S, carriers.begin() + S + C);
  std::sort(s.streams.begin(), s.streams.end());
  std::sort(s.cancel.begin(), s.cancel.end());
  s.aic.resize(C, S);
  for (Eigen::Index i = 0; i < s.aic.size(); ++i) s.aic(i) = u(rng);
  s.transitions.resize(2 * cfg.beta, S);
  for (int p = 0; p < cfg.beta; ++p) {
    for (int k = 0; k < S; ++k) {
      const cplx v(u(rng), u(rng));
      s.transitions(cfg.beta + p, k) = v;
      s.transitions(cfg.beta - 1 - p, k) = std::conj(v);
    }
  }
  return s;
}

/// Direct overlap-add of oracle composite pulses.
std::vector<cplx> oracle_waveform(const SystemConfig& cfg, const ShaperSolution& sol, const Eigen::MatrixXcd& d,
                                  PulseKind kind) {
  const auto w = oracle::window(cfg.fft_size, cfg.guard, cfg.beta, true);
  const int L = cfg.length(), Ns = cfg.symbol_period();
  std::vector<cplx> x(static_cast<std::size_t>(d.cols() * Ns + cfg.beta), cplx{});
  const auto rows = sol.carriers();
  const Eigen::MatrixXcd amp = sol.carrier_matrix() * d;
  const auto sup = transition_support(L, sol.has_transitions() ? sol.beta : 0);
  const Eigen::MatrixXcd t = sol.has_transitions() ? Eigen::MatrixXcd(sol.transitions * d) : Eigen::MatrixXcd();
  for (Eigen::Index u = 0; u < d.cols(); ++u) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto p = kind == PulseKind::Hermitian ? oracle::hermitian(cfg.fft_size, w, rows[r])
                                                  : oracle::conventional(cfg.fft_size, cfg.guard, w, rows[r]);
      for (int m = 0; m < L; ++m) x[static_cast<std::size_t>(u * Ns + m)] += amp(static_cast<Eigen::Index>(r), u) * p[static_cast<std::size_t>(m)];
    }
    for (std::size_t r = 0; r < sup.size(); ++r) x[static_cast<std::size_t>(u * Ns + sup[r])] += t(static_cast<Eigen::Index>(r), u);
  }
  return x;
}

double max_gap(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den == 0.0 ? num : num / den;
}

}  // namespace

TEST_CASE("zero symbols give a zero waveform of the right length") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 3);
  const PulseFamily fam(cfg, make_window(cfg, WindowShape::RaisedCosine), PulseKind::Hermitian);
  const ShaperSolution sol = baseline_solution(cfg, std::vector<int>{3, 4, 5}, PulseKind::Hermitian);
  SymbolStream st;
  st.data = Eigen::MatrixXcd::Zero(3, 7);
  for (const Waveform& wf : {synthesize(fam, sol, st), synthesize_fast_hermitian(fam, sol, st)}) {
    CHECK(wf.samples.size() == 7u * 20u + 3u);
    for (const cplx& v : wf.samples) CHECK(v == cplx{});
  }
}

TEST_CASE("one symbol on one carrier is the scaled pulse") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 3);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  for (PulseKind kind : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const PulseFamily fam(cfg, win, kind);
    const ShaperSolution sol = baseline_solution(cfg, std::vector<int>{6}, kind);
    SymbolStream st;
    st.data = Eigen::MatrixXcd::Constant(1, 1, cplx(0.7, -0.2));
    const Waveform wf = synthesize(fam, sol, st);
    const Pulse p = fam.pulse(6);
    for (int m = 0; m < cfg.length(); ++m) {
      const cplx ref = cplx(0.7, -0.2) * p.samples[static_cast<std::size_t>(m)];
      CHECK(std::abs(wf.samples[static_cast<std::size_t>(m)] - ref) <= 1e-15);
    }
  }
}

TEST_CASE("synthesis is linear") {
  const SystemConfig cfg = SystemConfig::make(32, 8, 5);
  const PulseFamily fam(cfg, make_window(cfg, WindowShape::RaisedCosine), PulseKind::Hermitian);
  std::mt19937_64 rng(3);
  const ShaperSolution sol = random_real_solution(cfg, rng, 5, 2);
  const SymbolStream a = random_symbols(sol, PowerAllocation{}, 9, Constellation::Qam16, 1);
  const SymbolStream b = random_symbols(sol, PowerAllocation{}, 9, Constellation::UnitRandom, 2);
  SymbolStream c;
  c.data = 2.0 * a.data + cplx(0.0, 1.5) * b.data;
  const Waveform wa = synthesize(fam, sol, a), wb = synthesize(fam, sol, b), wc = synthesize(fam, sol, c);
  std::vector<cplx> ref(wa.samples.size());
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = 2.0 * wa.samples[i] + cplx(0.0, 1.5) * wb.samples[i];
  CHECK(max_gap(wc.samples, ref) < 1e-12);
}

TEST_CASE("fast Hermitian transmitter matches direct synthesis on random configurations") {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> nd(16, 256);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int N = nd(rng);
    const int guard = std::uniform_int_distribution<int>(1, N / 2)(rng);
    const int beta = std::uniform_int_distribution<int>(0, guard)(rng);
    const SystemConfig cfg = SystemConfig::make(N, guard, beta);
    REQUIRE(cfg.odd_length());
    const PulseFamily fam(cfg, make_window(cfg, WindowShape::RaisedCosine), PulseKind::Hermitian);
    const int S = std::uniform_int_distribution<int>(1, N / 2)(rng);
    const int C = std::uniform_int_distribution<int>(0, N - S)(rng);
    const ShaperSolution sol = random_real_solution(cfg, rng, S, C);
    const SymbolStream st = random_symbols(sol, PowerAllocation{}, 4, Constellation::Qpsk, trial);
    const Waveform fast = synthesize_fast_hermitian(fam, sol, st);
    const std::vector<cplx> ref = oracle_waveform(cfg, sol, st.data, PulseKind::Hermitian);
    worst = std::max(worst, max_gap(fast.samples, ref));
    worst = std::max(worst, max_gap(synthesize(fam, sol, st).samples, ref));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("fast path preconditions") {
  const SystemConfig even = SystemConfig::make(16, 4, 2, ParityPolicy::Keep);
  const PulseFamily conv(even, make_window(even, WindowShape::RaisedCosine), PulseKind::Conventional);
  const ShaperSolution s = baseline_solution(even, std::vector<int>{1}, PulseKind::Conventional);
  SymbolStream st;
  st.data = Eigen::MatrixXcd::Ones(1, 1);
  CHECK_THROWS_AS(synthesize_fast_hermitian(conv, s, st), PreconditionViolation);
}

TEST_CASE("circular shift") {
  std::vector<cplx> x{1, 2, 3, 4, 5}, y(5), z(5);
  circular_shift_right(x, 2, y);
  CHECK(y == std::vector<cplx>{4, 5, 1, 2, 3});
  circular_shift_right(x, 5, z);
  CHECK(z == x);
  circular_shift_right(x, -1, z);
  CHECK(z == std::vector<cplx>{2, 3, 4, 5, 1});
  const SystemConfig fig = SystemConfig::make(4096, 1024, 511);
  CHECK(fig.cyclic_shift() == 1791);
}

TEST_CASE("loopback recovers data exactly") {
  const SystemConfig cfg = SystemConfig::make(32, 8, 5);
  const PulseFamily fc(cfg, make_window(cfg, WindowShape::RaisedCosine), PulseKind::Conventional);
  const PulseFamily fh(cfg, make_window(cfg, WindowShape::RaisedCosine), PulseKind::Hermitian);

  SUBCASE("conventional pulses without transitions") {
    const SystemConfig c0 = SystemConfig::make(32, 8, 0, ParityPolicy::Keep);
    const PulseFamily f0(c0, make_window(c0, WindowShape::Rectangular), PulseKind::Conventional);
    const ShaperSolution sol = baseline_solution(c0, std::vector<int>{1, 2, 5, 30}, PulseKind::Conventional);
    const SymbolStream st = random_symbols(sol, PowerAllocation{}, 6, Constellation::Qam16, 4);
    const LoopbackResult r = loopback_receive(f0, sol, synthesize(f0, sol, st), ShiftCompensation::Explicit);
    CHECK((r.symbols.data - st.data).norm() < 1e-12 * st.data.norm());
  }
  SUBCASE("AIC + AST is transparent with either compensation") {
    std::mt19937_64 rng(8);
    const ShaperSolution h = random_real_solution(cfg, rng, 10, 3);
    const SymbolStream st = random_symbols(h, PowerAllocation{}, 12, Constellation::Qpsk, 5);
    const Waveform wf = synthesize_fast_hermitian(fh, h, st);
    const LoopbackResult e = loopback_receive(fh, h, wf, ShiftCompensation::Explicit);
    CHECK((e.symbols.data - st.data).norm() < 1e-12 * st.data.norm());
    const Eigen::VectorXcd pilot = st.data.col(0);
    const LoopbackResult q = loopback_receive(fh, h, wf, ShiftCompensation::Feq, pilot);
    CHECK((q.symbols.data - st.data).norm() < 1e-12 * st.data.norm());
    const auto carriers = h.carriers();
    for (std::size_t r = 0; r < carriers.size(); ++r) {
      const double ang = -oracle::two_pi * carriers[r] * cfg.cyclic_shift() / cfg.fft_size;
      CHECK(std::abs(q.taps(static_cast<Eigen::Index>(r)) - std::polar(1.0, ang)) < 1e-12);
    }
    const ShaperSolution t = transform_solution(h, cfg);
    const LoopbackResult c = loopback_receive(fc, t, synthesize(fc, t, st), ShiftCompensation::Explicit);
    CHECK((c.symbols.data - st.data).norm() < 1e-12 * st.data.norm());
  }
  SUBCASE("orthogonal precoder decodes with its adjoint") {
    const std::vector<int> active{4, 5, 6, 7, 8, 9, 10, 11};
    const ShaperSolution o = solve_orthogonal_precoder(fh, active, NotchSet{{0.125, 0.13}}, PrecoderSpec{0.75, {}});
    const SymbolStream st = random_symbols(o, PowerAllocation{}, 5, Constellation::Qpsk, 6);
    const LoopbackResult r = loopback_receive(fh, o, synthesize(fh, o, st), ShiftCompensation::Explicit);
    CHECK((r.symbols.data - st.data).norm() < 1e-12 * st.data.norm());
    CHECK_THROWS_AS(loopback_receive(fh, o, synthesize(fh, o, st), ShiftCompensation::Feq), PreconditionViolation);
  }
  CHECK_THROWS_AS(parse_shift_compensation("magic"), InvalidConfig);
  CHECK(parse_shift_compensation("feq") == ShiftCompensation::Feq);
}

TEST_CASE("random symbols are reproducible and scaled") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 3);
  const ShaperSolution sol = baseline_solution(cfg, std::vector<int>{1, 2}, PulseKind::Hermitian);
  PowerAllocation p;
  p.variance[2] = 4.0;
  const SymbolStream a = random_symbols(sol, p, 4000, Constellation::Qpsk, 7);
  const SymbolStream b = random_symbols(sol, p, 4000, Constellation::Qpsk, 7);
  CHECK(a.data == b.data);
  for (Eigen::Index u = 0; u < 4000; ++u) {
    CHECK(std::norm(a.data(0, u)) == doctest::Approx(1.0));
    CHECK(std::norm(a.data(1, u)) == doctest::Approx(4.0));
  }
  const SymbolStream q = random_symbols(sol, PowerAllocation{}, 20000, Constellation::Qam16, 3);
  CHECK(q.data.row(0).squaredNorm() / 20000 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(parse_constellation(to_string(Constellation::Qam16)) == Constellation::Qam16);
}

TEST_CASE("waveform export formats") {
  Waveform wf;
  wf.samples = {cplx(1.0, -0.5), cplx(0.1, 3e-300)};
  std::ostringstream csv;
  write_waveform_csv(csv, wf);
  CHECK(csv.str() == "1,-0.5\n0.10000000000000001,3.0000000000000002e-300\n");
  std::ostringstream raw;
  write_waveform_raw(raw, wf);
  const std::string bytes = raw.str();
  REQUIRE(bytes.size() == 32);
  double back[4];
  std::memcpy(back, bytes.data(), 32);  // little-endian host
  CHECK(back[0] == 1.0);
  CHECK(back[1] == -0.5);
  CHECK(back[2] == 0.1);
  CHECK(back[3] == 3e-300);
}
