#include <doctest.h>

#include "ofdmshape/core.hpp"
#include "oracle.hpp"

using namespace ofdmshape;

TEST_CASE("odd-length rule extends beta by one sample") {
  const SystemConfig cfg = SystemConfig::make(64, 16, 8);
  CHECK(cfg.beta == 9);
  CHECK(cfg.odd_length());
  REQUIRE(cfg.notes.size() == 1);
  CHECK(cfg.notes[0].find("8 to 9") != std::string::npos);

  const SystemConfig keep = SystemConfig::make(64, 16, 8, ParityPolicy::Keep);
  CHECK(keep.beta == 8);
  CHECK_THROWS_AS(keep.center(), PreconditionViolation);
}

TEST_CASE("cyclic shift of the 4096-point configuration is 1791 samples") {
  const SystemConfig cfg = SystemConfig::make(4096, 1024, 511);
  CHECK(cfg.length() == 5631);
  CHECK(cfg.center() == 2815);
  CHECK(cfg.cyclic_shift() == 1791);
  CHECK(cfg.cyclic_shift() == (4096 - 1024 + 511 - 1) / 2);
}

TEST_CASE("raised-cosine window matches the closed form") {
  const SystemConfig cfg = SystemConfig::make(32, 8, 5);
  const Window w = make_window(cfg, WindowShape::RaisedCosine);
  const auto ref = oracle::window(32, 8, 5, true);
  REQUIRE(w.length() == static_cast<int>(ref.size()));
  for (std::size_t n = 0; n < ref.size(); ++n) CHECK(w.samples[n] == doctest::Approx(ref[n]).epsilon(1e-15));
  CHECK_THROWS_AS(make_window(SystemConfig::make(4, 0, 9), WindowShape::RaisedCosine), InvalidConfig);
}

TEST_CASE("pulses match their defining expressions") {
  const SystemConfig cfg = SystemConfig::make(64, 16, 7);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const auto w = oracle::window(64, 16, 7, true);
  for (int k : {0, 1, 17, 45, 63}) {
    const Pulse pc = conventional_pulse(cfg, win, k);
    const Pulse ph = hermitian_pulse(cfg, win, k);
    const auto rc = oracle::conventional(64, 16, w, k);
    const auto rh = oracle::hermitian(64, w, k);
    double ec = 0.0, eh = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
      ec = std::max(ec, std::abs(pc.samples[n] - rc[n]));
      eh = std::max(eh, std::abs(ph.samples[n] - rh[n]));
    }
    CHECK(ec < 1e-13);
    CHECK(eh < 1e-13);
    CHECK(ph.time_offset == -cfg.center());
  }
}

TEST_CASE("Hermitian pulse is conjugate symmetric with a real spectrum") {
  const SystemConfig cfg = SystemConfig::make(64, 16, 7);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const Pulse p = hermitian_pulse(cfg, win, 23);
  const int L = cfg.length();
  for (int m = 0; m < L; ++m) CHECK(p.samples[static_cast<std::size_t>(m)] == std::conj(p.samples[static_cast<std::size_t>(L - 1 - m)]));
  for (double f : {-0.5, -0.31, 0.0, 0.123456, 0.36, 0.4999}) {
    const cplx v = spectrum_at(p, f);
    CHECK(std::abs(v.imag()) <= 1e-12 * std::max(1.0, std::abs(v)));
  }
}

TEST_CASE("spectrum via the window transform matches the direct DTFT") {
  const SystemConfig cfg = SystemConfig::make(64, 16, 7);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const auto w = oracle::window(64, 16, 7, true);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uf(-0.5, 0.5);
  for (PulseKind kind : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const PulseFamily fam(cfg, win, kind);
    for (int k : {2, 20, 40, 63}) {
      const auto ref = kind == PulseKind::Hermitian ? oracle::hermitian(64, w, k) : oracle::conventional(64, 16, w, k);
      const int offset = kind == PulseKind::Hermitian ? -cfg.center() : 0;
      for (int i = 0; i < 20; ++i) {
        const double f = uf(rng);
        const cplx a = fam.spectrum(k, f), b = oracle::dtft(ref, f, offset);
        CHECK(std::abs(a - b) <= 1e-11 * cfg.length());
      }
    }
  }
}

TEST_CASE("carrier sets reject overlaps and bad indices") {
  CarrierSets s{{1, 2, 3}, {3, 4}};
  CHECK_THROWS_AS(s.validate(8), InvalidConfig);
  CarrierSets t{{1, 2, 9}, {}};
  CHECK_THROWS_AS(t.validate(8), InvalidConfig);
  CarrierSets u{{5, 1}, {7}};
  CHECK_NOTHROW(u.validate(8));
  CHECK(u.active() == std::vector<int>{1, 5, 7});
}

TEST_CASE("frequency wrapping") {
  CHECK(wrap_frequency(0.5) == -0.5);
  CHECK(wrap_frequency(0.75) == -0.25);
  CHECK(wrap_frequency(-0.75) == 0.25);
  CHECK(wrap_frequency(0.25) == 0.25);
}
