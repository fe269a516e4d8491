#include <doctest.h>

#include <sstream>

#include "ofdmshape/solution.hpp"
#include "ofdmshape/spectrum.hpp"
#include "oracle.hpp"

using namespace ofdmshape;

namespace {

ShaperSolution random_aic_ast(const SystemConfig& cfg, PulseKind kind, std::vector<int> data, std::vector<int> cancel,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ShaperSolution s;
  s.kind = ShaperKind::AicAst;
  s.pulse_kind = kind;
  s.fft_size = cfg.fft_size;
  s.length = cfg.length();
  s.beta = cfg.beta;
  s.streams = std::move(data);
  s.cancel = std::move(cancel);
  const auto S = static_cast<Eigen::Index>(s.streams.size());
  s.aic.resize(static_cast<Eigen::Index>(s.cancel.size()), S);
  for (Eigen::Index i = 0; i < s.aic.size(); ++i) s.aic(i) = cplx(g(rng), g(rng)) * 0.3;
  s.transitions.resize(2 * cfg.beta, S);
  for (Eigen::Index i = 0; i < s.transitions.size(); ++i) s.transitions(i) = cplx(g(rng), g(rng)) * 0.1;
  return s;
}

/// Composite pulse of stream s from the oracle pulses.
std::vector<cplx> oracle_composite(const SystemConfig& cfg, const ShaperSolution& sol, const std::vector<double>& w,
                                   int s) {
  std::vector<cplx> h(w.size(), cplx{});
  const auto rows = sol.carriers();
  const Eigen::MatrixXcd A = sol.carrier_matrix();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto p = sol.pulse_kind == PulseKind::Hermitian ? oracle::hermitian(cfg.fft_size, w, rows[r])
                                                          : oracle::conventional(cfg.fft_size, cfg.guard, w, rows[r]);
    for (std::size_t n = 0; n < h.size(); ++n) h[n] += A(static_cast<Eigen::Index>(r), s) * p[n];
  }
  const auto sup = transition_support(sol.length, sol.beta);
  for (std::size_t r = 0; r < sup.size(); ++r) h[static_cast<std::size_t>(sup[r])] += sol.transitions(static_cast<Eigen::Index>(r), s);
  return h;
}

}  // namespace

TEST_CASE("uniform grid and weights") {
  const FrequencyGrid g = FrequencyGrid::uniform(8, 3);
  REQUIRE(g.size() == 24);
  CHECK(g.points.front() == -0.5);
  CHECK(g.points[12] == 0.0);
  for (double w : g.weights()) CHECK(w == doctest::Approx(1.0 / 24));
  const FrequencyGrid e = FrequencyGrid::explicit_points({-0.25, 0.0, 0.25});
  double total = 0.0;
  for (double w : e.weights()) total += w;
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS_AS(FrequencyGrid::explicit_points({0.1, 0.0}), InvalidConfig);
}

TEST_CASE("band mask follows carrier cells") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 1);
  for (int Q : {1, 2, 3, 10}) {
    const FrequencyGrid g = FrequencyGrid::uniform(16, Q);
    const std::vector<CarrierRange> ranges{{0, 2}, {7, 7}, {14, 15}};
    const SpectralMask m = band_mask(cfg, ranges, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      // Cell of f: k = floor(f N + 1/2) mod N, with f N + 1/2 = (2i - QN + Q) / (2Q).
      const long num = 2L * static_cast<long>(i) - 16L * Q + Q, den = 2L * Q;
      long k = num >= 0 ? num / den : -((-num + den - 1) / den);
      k = ((k % 16) + 16) % 16;
      const bool in = k <= 2 || k == 7 || k >= 14;
      CHECK(m.weight[i] == (in ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("grid spectra agree with the pulse-family spectrum") {
  const SystemConfig cfg = SystemConfig::make(32, 8, 5);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const FrequencyGrid grid = FrequencyGrid::uniform(32, 5);
  for (PulseKind kind : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const PulseFamily fam(cfg, win, kind);
    const GridSpectra gs(fam, grid);
    for (int k : {0, 3, 16, 31}) {
      for (std::size_t m = 0; m < grid.size(); ++m) {
        CHECK(std::abs(gs(k, static_cast<int>(m)) - fam.spectrum(k, grid.points[m])) <= 1e-12 * cfg.length());
      }
    }
  }
}

TEST_CASE("analytic PSD matches the stream-sum oracle on uniform and explicit grids") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 3);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const auto w = oracle::window(16, 4, 3, true);
  PowerAllocation power;
  power.variance[5] = 2.0;
  for (PulseKind kind : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const PulseFamily fam(cfg, win, kind);
    const ShaperSolution sol = random_aic_ast(cfg, kind, {5, 6, 9}, {4, 10}, 11);
    const int offset = kind == PulseKind::Hermitian ? -cfg.center() : 0;
    for (const FrequencyGrid& grid :
         {FrequencyGrid::uniform(16, 4), FrequencyGrid::explicit_points({-0.41, -0.2, 0.0137, 0.3, 0.49})}) {
      const PsdCurve psd = analytic_psd(fam, sol, power, grid);
      for (std::size_t m = 0; m < grid.size(); ++m) {
        double ref = 0.0;
        for (int s = 0; s < sol.stream_count(); ++s) {
          const auto h = oracle_composite(cfg, sol, w, s);
          ref += power.of(sol.streams[static_cast<std::size_t>(s)]) * std::norm(oracle::dtft(h, grid.points[m], offset));
        }
        ref /= cfg.symbol_period();
        CHECK(oracle::relative_gap(psd.values[m], ref) < 1e-11);
      }
    }
  }
}

TEST_CASE("Parseval: integrated PSD equals the composite-pulse energy") {
  const SystemConfig cfg = SystemConfig::make(64, 16, 7);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const auto w = oracle::window(64, 16, 7, true);
  for (PulseKind kind : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const PulseFamily fam(cfg, win, kind);
    const ShaperSolution sol = random_aic_ast(cfg, kind, {20, 21, 30}, {18, 33}, 5);
    const FrequencyGrid grid = FrequencyGrid::uniform(64, 2);
    const PsdCurve psd = analytic_psd(fam, sol, PowerAllocation{}, grid);
    double integral = 0.0;
    for (double v : psd.values) integral += v / grid.size();
    double energy = 0.0;
    for (int s = 0; s < sol.stream_count(); ++s) {
      for (const cplx& v : oracle_composite(cfg, sol, w, s)) energy += std::norm(v);
    }
    energy /= cfg.symbol_period();
    CHECK(oracle::relative_gap(integral, energy) < 1e-12);
  }
}

TEST_CASE("composite PSD from explicit pulses equals the analytic PSD") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 3);
  const Window win = make_window(cfg, WindowShape::RaisedCosine);
  const PulseFamily fam(cfg, win, PulseKind::Hermitian);
  const ShaperSolution sol = random_aic_ast(cfg, PulseKind::Hermitian, {5, 6}, {4}, 2);
  const PulseBank bank(fam, sol.carriers());
  const Eigen::MatrixXcd H = composite_matrix(bank, sol);
  const FrequencyGrid grid = FrequencyGrid::uniform(16, 3);
  const std::vector<double> var{1.0, 1.0};
  CHECK(max_relative_difference(composite_psd(H, var, cfg.symbol_period(), grid).values,
                                analytic_psd(fam, sol, PowerAllocation{}, grid).values) < 1e-12);
}

TEST_CASE("Welch estimate of white noise is flat at the variance") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::vector<cplx> x(1 << 17);
  for (auto& v : x) v = cplx(g(rng), g(rng));
  WelchOptions opt;
  opt.segment = 256;
  const FrequencyGrid grid = FrequencyGrid::uniform(32, 2);
  const PsdCurve psd = welch_psd(x, opt, grid);
  double mean = 0.0;
  for (double v : psd.values) mean += v / psd.values.size();
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  for (double v : psd.values) CHECK(v == doctest::Approx(1.0).epsilon(0.15));
  CHECK_THROWS_AS(welch_psd(std::span<const cplx>(x.data(), 300), opt, grid), InvalidConfig);
}

TEST_CASE("masked power needs matching grids") {
  const SystemConfig cfg = SystemConfig::make(16, 4, 1);
  PsdCurve p;
  p.grid = FrequencyGrid::uniform(16, 2);
  p.values.assign(32, 1.0);
  const SpectralMask a = band_mask(cfg, std::vector<CarrierRange>{{0, 3}}, FrequencyGrid::uniform(16, 2));
  CHECK(masked_power(p, a) == doctest::Approx(4.0 / 16));
  const SpectralMask b = band_mask(cfg, std::vector<CarrierRange>{{0, 3}}, FrequencyGrid::uniform(16, 3));
  CHECK_THROWS_AS(masked_power(p, b), GridMismatch);
}

TEST_CASE("relative difference and CSV output") {
  const std::vector<double> a{0.0, 1.0, 2.0}, b{0.0, 1.0, 1.0};
  CHECK(max_relative_difference(a, b) == 0.5);
  PsdCurve p;
  p.grid = FrequencyGrid::uniform(2, 1);
  p.values = {1.0, 10.0};
  std::ostringstream out;
  write_psd_csv(out, p);
  CHECK(out.str() == "freq_normalized,psd_db\n-0.5,-10\n0,0\n");
}
