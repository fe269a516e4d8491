#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "ofdmshape/scenario.hpp"
#include "ofdmshape/synth.hpp"

namespace ofdmshape {

namespace {

struct Setup {
  SystemConfig cfg;
  PulseFamily herm;
  PulseFamily conv;
};

Setup make_setup(int N, int guard, int beta, WindowShape shape) {
  SystemConfig cfg = SystemConfig::make(N, guard, beta);
  const Window win = make_window(cfg, shape);
  return {cfg, PulseFamily(cfg, win, PulseKind::Hermitian), PulseFamily(cfg, win, PulseKind::Conventional)};
}

/// Grid points within 1e-12 of an imposed exact null.
std::vector<char> null_points(const FrequencyGrid& grid, const NotchSet& ns) {
  std::vector<char> hit(grid.size(), 0);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    for (double f : ns.freqs) {
      if (std::abs(wrap_frequency(grid.points[m] - f)) < 1e-12) hit[m] = 1;
    }
  }
  return hit;
}

double relative_difference(const PsdCurve& a, const PsdCurve& b, const std::vector<char>& skip) {
  double worst = 0.0;
  for (std::size_t m = 0; m < a.values.size(); ++m) {
    if (!skip.empty() && skip[m]) continue;
    const double den = std::max(std::abs(a.values[m]), std::abs(b.values[m]));
    if (den == 0.0) continue;
    worst = std::max(worst, std::abs(a.values[m] - b.values[m]) / den);
  }
  return worst;
}

double magnitude_error(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a.cwiseAbs() - b.cwiseAbs()).cwiseAbs().maxCoeff() / scale;
}

double solution_magnitude_error(const ShaperSolution& h, const ShaperSolution& t) {
  return std::max({magnitude_error(h.precoder, t.precoder), magnitude_error(h.aic, t.aic),
                   magnitude_error(h.transitions, t.transitions)});
}

ComplexityReport report(const std::string& name, ComplexityMethod m, const ComplexityDims& dims, PulseKind kind,
                        std::optional<std::uint64_t> measured) {
  const SymbolicCount sc = symbolic_count(m, dims);
  ComplexityReport r;
  r.method = name + ":" + to_string(m);
  r.pulse_kind = kind;
  r.symbolic = kind == PulseKind::Hermitian ? sc.hermitian : sc.conventional;
  r.measured = measured;
  r.reduction = sc.reduction();
  return r;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void apply_overrides(Scenario& sc, const RunOptions& opt) {
  if (opt.grid_density) sc.grid_density = *opt.grid_density;
  if (opt.seed) sc.seed = *opt.seed;
  if (opt.welch) sc.welch = true;
  if (opt.methods) {
    std::vector<MethodSpec> keep;
    for (const std::string& n : *opt.methods) {
      auto it = std::find_if(sc.methods.begin(), sc.methods.end(), [&](const MethodSpec& m) { return m.name == n; });
      if (it == sc.methods.end()) throw InvalidConfig("method '" + n + "' is not defined by the scenario");
      keep.push_back(*it);
    }
    sc.methods = std::move(keep);
  }
}

ScenarioResult execute_scenario(const Scenario& sc, std::ostream* log) {
  for (const std::string& d : validate_config(sc)) {
    if (d.rfind("error: ", 0) == 0) throw InvalidConfig(d.substr(7));
  }
  ScenarioResult res;
  res.scenario = sc;
  auto say = [&](const std::string& s) {
    if (log) *log << s << std::endl;
  };

  const FrequencyGrid grid = FrequencyGrid::uniform(sc.fft_size, sc.grid_density);
  const Setup ast = make_setup(sc.fft_size, sc.guard, sc.beta, sc.window);
  const Setup prec = make_setup(sc.fft_size, sc.guard, sc.precoder_beta, sc.precoder_window);
  const SpectralMask mask0 = band_mask(ast.cfg, sc.notched_band, grid, "notched band");
  SpectralMask total{"total power", grid, std::vector<double>(grid.size(), 1.0), std::nullopt};
  SpectralMask pass{"passband power", grid, std::vector<double>(grid.size()), std::nullopt};
  for (std::size_t m = 0; m < grid.size(); ++m) pass.weight[m] = 1.0 - mask0.weight[m];

  CarrierSets sets;
  sets.data = sc.aic_data();
  sets.cancel = sc.cancel;
  std::sort(sets.cancel.begin(), sets.cancel.end());
  const std::vector<int> active = sc.passband();
  const NotchSet notch = sc.notch_set();
  const std::vector<char> nulls = null_points(grid, notch);

  const PsdCurve base_ast = analytic_psd(ast.herm, baseline_solution(ast.cfg, sets.data, PulseKind::Hermitian), sc.power, grid);
  const PsdCurve base_prec = analytic_psd(prec.herm, baseline_solution(prec.cfg, active, PulseKind::Hermitian), sc.power, grid);
  res.baseline = base_ast;

  res.summary.push_back("scenario " + sc.name + ": N = " + std::to_string(sc.fft_size) + ", N_GI = " +
                        std::to_string(sc.guard) + ", beta = " + std::to_string(ast.cfg.beta) + ", Q = " +
                        std::to_string(sc.grid_density) + ", seed = " + std::to_string(sc.seed));
  res.summary.push_back("|D| = " + std::to_string(sets.data.size()) + ", |C| = " + std::to_string(sets.cancel.size()) +
                        " (AIC methods); |K| = " + std::to_string(active.size()) + " (precoders)");
  res.summary.push_back("cyclic shift (eta - N_GI) = " + std::to_string(ast.cfg.cyclic_shift()) + " samples");
  for (const auto& n : ast.cfg.notes) res.summary.push_back("note: " + n);
  for (const auto& n : prec.cfg.notes) res.summary.push_back("note: precoders: " + n);

  for (const MethodSpec& spec : sc.methods) {
    const auto t0 = std::chrono::steady_clock::now();
    MethodResult mr;
    mr.spec = spec;
    SolveOptions opt;
    opt.ridge_scale = spec.number("ridge_scale", 1e-12);
    opt.realness_threshold = sc.realness_tolerance;
    SolveOptions unres = opt;
    unres.exploit_realness = false;

    const bool is_aic = spec.type == MethodType::AicAst || spec.type == MethodType::AicAstPeak;
    const Setup& S = is_aic ? ast : prec;
    const bool exact_nulls = spec.type == MethodType::Nullspace || spec.type == MethodType::Weighted ||
                             spec.type == MethodType::OrthogonalNotch;
    std::vector<SpectralMask> cons;
    if (spec.type == MethodType::AicAst) {
      SpectralMask c = total;
      c.bound = spec.number("total_power_factor", 1.01) * masked_power(base_ast, total);
      cons.push_back(c);
    } else if (spec.type == MethodType::AicAstPeak) {
      SpectralMask c = pass;
      c.bound = spec.number("passband_power_factor", 1.0) * masked_power(base_ast, pass);
      cons.push_back(c);
    }
    PrecoderSpec ps;
    ps.rate = sc.rate;
    if (spec.type == MethodType::Weighted) {
      const double lo = spec.number("weight_min", 1.0), hi = spec.number("weight_max", 2.0);
      const std::size_t K = active.size();
      for (std::size_t i = 0; i < K; ++i) ps.weights.push_back(K > 1 ? lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(K - 1) : lo);
    }

    auto solve = [&](const PulseFamily& fam, const SolveOptions& o) -> ShaperSolution {
      switch (spec.type) {
        case MethodType::AicAst:
        case MethodType::AicAstPeak: return solve_aic_ast(fam, sets, mask0, cons, sc.power, o);
        case MethodType::Nullspace: return solve_nullspace_precoder(fam, active, notch, o);
        case MethodType::Weighted: return solve_weighted_precoder(fam, active, notch, ps, o);
        case MethodType::Orthogonal: return solve_orthogonal_precoder(fam, active, mask0, ps, o);
        case MethodType::OrthogonalNotch: return solve_orthogonal_precoder(fam, active, notch, ps, o);
      }
      throw Error("unhandled method");
    };

    say("[" + spec.name + "] solving with Hermitian pulses");
    mr.hermitian = solve(S.herm, opt);
    say("[" + spec.name + "] solving with conventional pulses");
    mr.conventional = solve(S.conv, opt);
    if (sc.unrestricted) {
      say("[" + spec.name + "] solving with Hermitian pulses, complex formulation");
      mr.unrestricted = solve(S.herm, unres);
    }
    mr.transformed = transform_solution(mr.hermitian, S.cfg);

    say("[" + spec.name + "] evaluating PSDs");
    mr.psd_hermitian = analytic_psd(S.herm, mr.hermitian, sc.power, grid);
    mr.psd_conventional = analytic_psd(S.conv, mr.conventional, sc.power, grid);
    mr.psd_transformed = analytic_psd(S.conv, mr.transformed, sc.power, grid);
    const std::vector<char> none;
    const std::vector<char>& skip = exact_nulls ? nulls : none;
    mr.diff_independent = relative_difference(mr.psd_hermitian, mr.psd_conventional, skip);
    mr.diff_transform = relative_difference(mr.psd_hermitian, mr.psd_transformed, skip);
    mr.diff_independent_strict = relative_difference(mr.psd_hermitian, mr.psd_conventional, none);
    mr.diff_transform_strict = relative_difference(mr.psd_hermitian, mr.psd_transformed, none);
    mr.magnitude_error = solution_magnitude_error(mr.hermitian, mr.transformed);
    const PsdCurve& base = is_aic ? base_ast : base_prec;
    mr.notch_power_db = 10.0 * std::log10(masked_power(mr.psd_hermitian, mask0) / masked_power(base, mask0));

    const SymbolStream one = random_symbols(mr.hermitian, sc.power, 1, Constellation::UnitRandom, sc.seed);
    const Eigen::VectorXcd d = one.data.col(0);
    ComplexityDims dims;
    dims.data = mr.hermitian.stream_count();
    dims.beta = S.cfg.beta;
    dims.harmonics = sc.harmonics;
    for (const ShaperSolution* sol : {&mr.conventional, &mr.hermitian}) {
      if (is_aic) {
        dims.cancel = static_cast<int>(sol->cancel.size());
        mr.complexity.push_back(report(spec.name, ComplexityMethod::Aic, dims, sol->pulse_kind,
                                       measured_count(ComplexityMethod::Aic, *sol, d).products));
        mr.complexity.push_back(report(spec.name, ComplexityMethod::AstRegular, dims, sol->pulse_kind,
                                       measured_count(ComplexityMethod::AstRegular, *sol, d).products));
        std::optional<std::uint64_t> harm;
        if (dims.beta % 2 == 1) harm = measured_count(fit_harmonic_transitions(*sol, sc.harmonics), d).products;
        mr.complexity.push_back(report(spec.name, ComplexityMethod::AstHarmonic, dims, sol->pulse_kind, harm));
      } else {
        dims.active = static_cast<int>(sol->active.size());
        mr.complexity.push_back(report(spec.name, ComplexityMethod::Precoding, dims, sol->pulse_kind,
                                       measured_count(ComplexityMethod::Precoding, *sol, d).products));
      }
    }
    mr.seconds = seconds_since(t0);
    say("[" + spec.name + "] done in " + fmt("%.1f", mr.seconds) + " s");
    res.methods.push_back(std::move(mr));
  }

  // Checks and summary.
  auto check = [&](bool ok, const std::string& what) {
    res.summary.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
    if (!ok) res.pass = false;
  };
  for (const MethodResult& mr : res.methods) {
    const std::string n = mr.spec.name;
    res.summary.push_back("method " + n + " (" + to_string(mr.spec.type) + "): notch power " +
                          fmt("%.2f", mr.notch_power_db) + " dB vs baseline, streams " +
                          std::to_string(mr.hermitian.stream_count()) + ", real unknowns " +
                          std::to_string(mr.hermitian.real_unknowns) + " (Hermitian) vs " +
                          std::to_string(mr.conventional.real_unknowns) + " (conventional)");
    for (const auto& note : mr.hermitian.notes) res.summary.push_back("  note: " + note);
    check(mr.diff_independent <= sc.psd_tolerance,
          n + ": PSD Hermitian vs conventional solve, max rel diff " + fmt("%.3e", mr.diff_independent) + " (strict " +
              fmt("%.3e", mr.diff_independent_strict) + ")");
    check(mr.diff_transform <= sc.psd_tolerance,
          n + ": PSD Hermitian vs transformed solution, max rel diff " + fmt("%.3e", mr.diff_transform) + " (strict " +
              fmt("%.3e", mr.diff_transform_strict) + ")");
    check(mr.magnitude_error <= 1e-14, n + ": coefficient magnitudes preserved by the transform, max rel error " +
                                           fmt("%.3e", mr.magnitude_error));
    check(mr.hermitian.realness.value() <= sc.realness_tolerance,
          n + ": Hermitian realness certificate " + fmt("%.3e", mr.hermitian.realness.value()));
    if (mr.unrestricted) {
      res.summary.push_back("  info: " + n + ": complex-formulation Hermitian certificate " +
                            fmt("%.3e", mr.unrestricted->realness.value()));
    }
    res.summary.push_back("  info: " + n + ": conventional certificate " + fmt("%.3e", mr.conventional.realness.value()));
    for (const auto& c : mr.complexity) {
      check(c.measured ? c.consistent() : true,
            c.method + " (" + to_string(c.pulse_kind) + "): symbolic " + std::to_string(c.symbolic) + ", measured " +
                (c.measured ? std::to_string(*c.measured) : std::string("n/a")) + ", reduction " +
                fmt("%.3f", 100.0 * c.reduction) + "%");
    }
  }
  const MethodResult* nul = nullptr;
  const MethodResult* orth_notch = nullptr;
  for (const MethodResult& mr : res.methods) {
    if (mr.spec.type == MethodType::Nullspace && !nul) nul = &mr;
    if (mr.spec.type == MethodType::OrthogonalNotch && !orth_notch) orth_notch = &mr;
  }
  if (nul && orth_notch && orth_notch->hermitian.stream_count() + static_cast<int>(notch.freqs.size()) ==
                         static_cast<int>(active.size())) {
    res.precoder_equivalence = relative_difference(nul->psd_hermitian, orth_notch->psd_hermitian, nulls);
    check(*res.precoder_equivalence <= sc.equivalence_tolerance,
          "null-space vs orthogonal notch precoder PSD, max rel diff " + fmt("%.3e", *res.precoder_equivalence) + " (strict " +
              fmt("%.3e", relative_difference(nul->psd_hermitian, orth_notch->psd_hermitian, {})) + ")");
  }

  if (sc.welch) {
    say("[welch] synthesizing " + std::to_string(sc.welch_symbols) + " baseline symbols");
    const ShaperSolution bsol = baseline_solution(ast.cfg, sets.data, PulseKind::Conventional);
    const SymbolStream st = random_symbols(bsol, sc.power, sc.welch_symbols, Constellation::Qpsk, sc.seed);
    const Waveform wf = synthesize(ast.conv, bsol, st);
    WelchOptions wo;
    wo.segment = sc.welch_segment * ast.cfg.length();
    const PsdCurve est = welch_psd(wf.samples, wo, grid);
    const double peak = base_ast.peak();
    double worst = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
      if (base_ast.values[m] < 1e-4 * peak) continue;
      worst = std::max(worst, std::abs(10.0 * std::log10(est.values[m] / base_ast.values[m])));
    }
    res.welch_deviation_db = worst;
    check(worst <= 1.0, "Welch estimate (segment " + std::to_string(wo.segment) + ") of " +
                            std::to_string(sc.welch_symbols) + " baseline symbols vs analytic PSD, max deviation " + fmt("%.3f", worst) +
                            " dB within 40 dB of peak");
  }
  return res;
}

void write_artifacts(const ScenarioResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("psd_baseline.csv");
    write_psd_csv(out, res.baseline);
  }
  for (const MethodResult& mr : res.methods) {
    auto h = open("psd_" + mr.spec.name + "_hermitian.csv");
    write_psd_csv(h, mr.psd_hermitian);
    auto c = open("psd_" + mr.spec.name + "_conventional.csv");
    write_psd_csv(c, mr.psd_conventional);
  }
  {
    auto out = open("psd_diff.csv");
    out << "method,freq_normalized,psd_hermitian,psd_conventional,psd_transformed,abs_diff,rel_diff\n";
    char line[256];
    for (const MethodResult& mr : res.methods) {
      for (std::size_t m = 0; m < mr.psd_hermitian.values.size(); ++m) {
        const double a = mr.psd_hermitian.values[m], b = mr.psd_conventional.values[m];
        const double den = std::max(a, b);
        std::snprintf(line, sizeof line, "%s,%.12g,%.17g,%.17g,%.17g,%.6e,%.6e\n", mr.spec.name.c_str(),
                      mr.psd_hermitian.grid.points[m], a, b, mr.psd_transformed.values[m], std::abs(a - b),
                      den > 0.0 ? std::abs(a - b) / den : 0.0);
        out << line;
      }
    }
  }
  {
    auto out = open("realness.csv");
    out << "method,pulse_kind,formulation,coefficient_imag,transition_asymmetry,certificate,real_unknowns\n";
    char line[256];
    auto row = [&](const std::string& n, const ShaperSolution& s, const char* form) {
      std::snprintf(line, sizeof line, "%s,%s,%s,%.6e,%.6e,%.6e,%d\n", n.c_str(), to_string(s.pulse_kind), form,
                    s.realness.coefficient_imag, s.realness.transition_asymmetry, s.realness.value(), s.real_unknowns);
      out << line;
    };
    for (const MethodResult& mr : res.methods) {
      row(mr.spec.name, mr.hermitian, "default");
      if (mr.unrestricted) row(mr.spec.name, *mr.unrestricted, "complex");
      row(mr.spec.name, mr.conventional, "default");
    }
  }
  {
    auto out = open("complexity.csv");
    std::vector<ComplexityReport> rows;
    for (const MethodResult& mr : res.methods) rows.insert(rows.end(), mr.complexity.begin(), mr.complexity.end());
    write_complexity_csv(out, rows);
  }
  {
    auto out = open("summary.txt");
    for (const auto& s : res.summary) out << s << "\n";
    out << (res.pass ? "overall: PASS\n" : "overall: FAIL\n");
  }
}

int run_scenario(const std::string& path_or_builtin, const std::filesystem::path& dir, const RunOptions& opt,
                 std::ostream& err) {
  try {
    Scenario sc = load_scenario(path_or_builtin);
    apply_overrides(sc, opt);
    const ScenarioResult res = execute_scenario(sc, opt.log);
    write_artifacts(res, dir);
    if (opt.log) {
      for (const auto& s : res.summary) *opt.log << s << "\n";
    }
    return res.pass ? 0 : 3;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ofdmshape
