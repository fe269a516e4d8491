#include <doctest.h>

#include <random>
#include <sstream>

#include "ofdmshape/complexity.hpp"
#include "ofdmshape/shapers.hpp"

using namespace ofdmshape;

namespace {

Eigen::VectorXcd unit_symbols(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  Eigen::VectorXcd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::polar(1.0, ph(rng));
  return d;
}

struct Designs {
  SystemConfig cfg = SystemConfig::make(32, 8, 7);
  Window win = make_window(cfg, WindowShape::RaisedCosine);
  FrequencyGrid grid = FrequencyGrid::uniform(32, 4);
  SpectralMask mask0 = band_mask(cfg, std::vector<CarrierRange>{{0, 5}, {26, 31}}, grid);
  CarrierSets sets{{7, 8, 9, 10, 11, 12, 13, 14, 15, 16}, {6, 25}};

  ShaperSolution aic_ast(PulseKind k) const {
    return solve_aic_ast(PulseFamily(cfg, win, k), sets, mask0, {}, PowerAllocation{});
  }
};

}  // namespace

TEST_CASE("closed-form counts") {
  const SymbolicCount aic = symbolic_count(ComplexityMethod::Aic, {10, 2, 0, 0, 0});
  CHECK(aic.conventional == 80);
  CHECK(aic.hermitian == 40);
  CHECK(aic.reduction() == 0.5);
  const SymbolicCount pre = symbolic_count(ComplexityMethod::Precoding, {10, 0, 12, 0, 0});
  CHECK(pre.conventional == 480);
  CHECK(pre.hermitian == 240);
  const SymbolicCount har = symbolic_count(ComplexityMethod::AstHarmonic, {10, 0, 0, 8, 4});
  CHECK(har.conventional == 368);
  CHECK(har.hermitian == 208);
  CHECK(har.reduction() > 0.0);
  CHECK(har.reduction() < 0.5);
  const SymbolicCount ast = symbolic_count(ComplexityMethod::AstRegular, {10, 0, 0, 511, 0});
  CHECK(ast.conventional == 8u * 511u * 10u);
  CHECK(ast.hermitian == 4u * 511u * 10u);
  CHECK(harmonic_fft_size(511) == 512);
  CHECK(harmonic_fft_size(1) == 1);
  CHECK_THROWS_AS(symbolic_count(ComplexityMethod::Aic, {-1, 0, 0, 0, 0}), InvalidConfig);
}

TEST_CASE("counted arithmetic") {
  OpCounter c;
  const CountedReal a{2.0, &c}, b{3.0, &c};
  CHECK((a * b).v == 6.0);
  CHECK(c.products() == 1);
  const CountedComplex z{{1.0, 2.0}, &c}, y{{-0.5, 4.0}, &c};
  CHECK((a * z).v == cplx(2.0, 4.0));
  CHECK(c.products() == 3);
  CHECK((z * y).v == cplx(1.0, 2.0) * cplx(-0.5, 4.0));
  CHECK(c.products() == 7);
  (void)(z + y);
  (void)(z - y);
  CHECK(c.products() == 7);
  const auto [p, q] = times_conjugate_pair(z, y);
  CHECK(c.products() == 11);
  CHECK(p.v == cplx(1.0, 2.0) * cplx(-0.5, 4.0));
  CHECK(q.v == cplx(1.0, 2.0) * std::conj(cplx(-0.5, 4.0)));
}

TEST_CASE("AIC and precoding counts are measured on the hot path") {
  const Designs ds;
  for (PulseKind k : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const ShaperSolution sol = ds.aic_ast(k);
    const Eigen::VectorXcd d = unit_symbols(10, 1);
    const MeasuredCount m = measured_count(ComplexityMethod::Aic, sol, d);
    const SymbolicCount s = symbolic_count(ComplexityMethod::Aic, {10, 2, 0, 0, 0});
    CHECK(m.products == (k == PulseKind::Hermitian ? s.hermitian : s.conventional));
    CHECK(m.real_path == (k == PulseKind::Hermitian));
    CHECK((m.output - sol.aic * d).norm() < 1e-13);

    const PulseFamily fam(ds.cfg, ds.win, k);
    const std::vector<int> active{6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 25};
    const ShaperSolution pre = solve_nullspace_precoder(fam, active, NotchSet{{-0.2, 0.33}});
    const Eigen::VectorXcd x = unit_symbols(12, 2);
    const MeasuredCount mp = measured_count(ComplexityMethod::Precoding, pre, x);
    const SymbolicCount sp = symbolic_count(ComplexityMethod::Precoding, {12, 0, 12, 0, 0});
    CHECK(mp.products == (k == PulseKind::Hermitian ? sp.hermitian : sp.conventional));
    CHECK((mp.output - pre.precoder * x).norm() < 1e-13);
  }
}

TEST_CASE("transition counts, regular and harmonic") {
  const Designs ds;
  const Eigen::VectorXcd d = unit_symbols(10, 3);
  for (PulseKind k : {PulseKind::Conventional, PulseKind::Hermitian}) {
    const ShaperSolution sol = ds.aic_ast(k);
    const bool herm = k == PulseKind::Hermitian;
    const MeasuredCount r = measured_count(ComplexityMethod::AstRegular, sol, d);
    const SymbolicCount sr = symbolic_count(ComplexityMethod::AstRegular, {10, 0, 0, 7, 0});
    CHECK(r.products == (herm ? sr.hermitian : sr.conventional));
    CHECK((r.output - sol.transitions * d).norm() < 1e-13 * (1 + (sol.transitions * d).norm()));

    for (int b : {2, 4, 7}) {
      const HarmonicTransitions ht = fit_harmonic_transitions(sol, b);
      CHECK(ht.fft_size == 8);
      CHECK(ht.conjugate_pair == herm);
      const MeasuredCount h = measured_count(ht, d);
      const SymbolicCount sh = symbolic_count(ComplexityMethod::AstHarmonic, {10, 0, 0, 7, b});
      CHECK(h.products == (herm ? sh.hermitian : sh.conventional));
      CHECK(sh.reduction() > 0.0);
      CHECK(sh.reduction() < 0.5);
      const Eigen::VectorXcd ref = evaluate_harmonic_transitions(ht, d);
      CHECK((h.output - ref).norm() < 1e-12 * (1 + ref.norm()));
    }
    // With b = F the expansion is exact on beta <= F samples.
    const HarmonicTransitions full = fit_harmonic_transitions(sol, 8);
    const Eigen::VectorXcd exact = sol.transitions * d;
    CHECK((evaluate_harmonic_transitions(full, d) - exact).norm() < 1e-10 * (1 + exact.norm()));
  }
}

TEST_CASE("harmonic fit preconditions") {
  const Designs ds;
  ShaperSolution sol = ds.aic_ast(PulseKind::Hermitian);
  CHECK_THROWS_AS(fit_harmonic_transitions(sol, 9), InvalidConfig);
  CHECK_THROWS_AS(measured_count(ComplexityMethod::AstHarmonic, sol, unit_symbols(10, 1)), PreconditionViolation);
  const ShaperSolution base = baseline_solution(ds.cfg, ds.sets.data, PulseKind::Hermitian);
  CHECK_THROWS_AS(fit_harmonic_transitions(base, 2), PreconditionViolation);
}

TEST_CASE("complexity CSV") {
  std::vector<ComplexityReport> rows{{"aic", PulseKind::Hermitian, 40, 40, 0.5}, {"ast_harmonic", PulseKind::Conventional, 368, std::nullopt, 0.0}};
  std::ostringstream out;
  write_complexity_csv(out, rows);
  CHECK(out.str() ==
        "method,pulse_kind,symbolic,measured,reduction_pct\naic,hermitian,40,40,50.000000\n"
        "ast_harmonic,conventional,368,,0.000000\n");
  CHECK(rows[0].consistent());
  CHECK_FALSE(rows[1].consistent());
  CHECK(parse_complexity_method("ast_regular") == ComplexityMethod::AstRegular);
}
