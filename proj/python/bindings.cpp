#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ofdmshape/complexity.hpp"
#include "ofdmshape/scenario.hpp"
#include "ofdmshape/shapers.hpp"
#include "ofdmshape/synth.hpp"

namespace py = pybind11;
using namespace ofdmshape;

namespace {

PulseFamily family(int fft_size, int guard, int beta, const std::string& window, const std::string& kind) {
  const SystemConfig cfg = SystemConfig::make(fft_size, guard, beta);
  return PulseFamily(cfg, make_window(cfg, parse_window_shape(window)), parse_pulse_kind(kind));
}

py::dict method_dict(const MethodResult& m) {
  py::dict d;
  d["name"] = m.spec.name;
  d["type"] = to_string(m.spec.type);
  d["diff_independent"] = m.diff_independent;
  d["diff_transform"] = m.diff_transform;
  d["diff_independent_strict"] = m.diff_independent_strict;
  d["magnitude_error"] = m.magnitude_error;
  d["notch_power_db"] = m.notch_power_db;
  d["certificate_hermitian"] = m.hermitian.realness.value();
  d["certificate_conventional"] = m.conventional.realness.value();
  if (m.unrestricted) d["certificate_complex_formulation"] = m.unrestricted->realness.value();
  d["real_unknowns_hermitian"] = m.hermitian.real_unknowns;
  d["real_unknowns_conventional"] = m.conventional.real_unknowns;
  d["psd_hermitian"] = m.psd_hermitian.values;
  d["psd_conventional"] = m.psd_conventional.values;
  py::list rows;
  for (const auto& c : m.complexity) {
    py::dict r;
    r["method"] = c.method;
    r["pulse_kind"] = to_string(c.pulse_kind);
    r["symbolic"] = c.symbolic;
    r["measured"] = c.measured ? py::cast(*c.measured) : py::none();
    r["reduction"] = c.reduction;
    rows.append(r);
  }
  d["complexity"] = rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hermitian-pulse OFDM spectral shaping";

  // Translators run newest first, so the base class goes first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<Infeasible>(m, "Infeasible", base.ptr());

  m.def("cyclic_shift", [](int n, int g, int b) { return SystemConfig::make(n, g, b).cyclic_shift(); },
        py::arg("fft_size"), py::arg("guard"), py::arg("beta"));

  m.def(
      "pulse",
      [](int n, int g, int b, int k, const std::string& kind, const std::string& window) {
        const Pulse p = family(n, g, b, window, kind).pulse(k);
        return py::make_tuple(p.samples, p.time_offset);
      },
      py::arg("fft_size"), py::arg("guard"), py::arg("beta"), py::arg("carrier"), py::arg("kind") = "hermitian",
      py::arg("window") = "raised_cosine", "Pulse samples and the time index of the first sample.");

  m.def(
      "pulse_spectrum",
      [](int n, int g, int b, int k, const std::vector<double>& f, const std::string& kind,
         const std::string& window) {
        const PulseFamily fam = family(n, g, b, window, kind);
        std::vector<cplx> out;
        for (double x : f) out.push_back(fam.spectrum(k, x));
        return out;
      },
      py::arg("fft_size"), py::arg("guard"), py::arg("beta"), py::arg("carrier"), py::arg("freqs"),
      py::arg("kind") = "hermitian", py::arg("window") = "raised_cosine");

  m.def(
      "solve_aic",
      [](int n, int g, int b, const std::vector<int>& data, const std::vector<int>& cancel,
         const std::vector<std::pair<int, int>>& notched, int q, const std::string& kind) {
        const PulseFamily fam = family(n, g, b, "raised_cosine", kind);
        const FrequencyGrid grid = FrequencyGrid::uniform(n, q);
        const SpectralMask mask = band_mask(fam.config(), notched, grid);
        const ShaperSolution s = solve_aic(fam, CarrierSets{data, cancel}, mask);
        return py::make_tuple(Eigen::MatrixXcd(s.aic), s.realness.value());
      },
      py::arg("fft_size"), py::arg("guard"), py::arg("beta"), py::arg("data"), py::arg("cancel"),
      py::arg("notched_band"), py::arg("grid_density") = 10, py::arg("kind") = "hermitian",
      "Cancellation-carrier weights (|C| x |D|) and the realness certificate.");

  m.def(
      "symbolic_count",
      [](const std::string& method, int data, int cancel, int active, int beta, int harmonics) {
        const SymbolicCount c =
            symbolic_count(parse_complexity_method(method), ComplexityDims{data, cancel, active, beta, harmonics});
        return py::make_tuple(c.conventional, c.hermitian);
      },
      py::arg("method"), py::arg("data") = 0, py::arg("cancel") = 0, py::arg("active") = 0, py::arg("beta") = 0,
      py::arg("harmonics") = 0, "(conventional, hermitian) real products per symbol.");

  m.def("builtin_scenario_text", &builtin_scenario_text, py::arg("name"));

  m.def(
      "validate",
      [](const std::string& path) { return validate_config_file(path); }, py::arg("scenario"));

  m.def(
      "run_scenario",
      [](const std::string& scenario, const std::string& out_dir, std::optional<std::vector<std::string>> methods,
         bool welch) {
        RunOptions opt;
        opt.methods = std::move(methods);
        opt.welch = welch;
        std::ostringstream err;
        int code;
        {
          py::gil_scoped_release nogil;
          code = ofdmshape::run_scenario(scenario, out_dir, opt, err);
        }
        return py::make_tuple(code, err.str());
      },
      py::arg("scenario"), py::arg("out_dir"), py::arg("methods") = py::none(), py::arg("welch") = false,
      "Runs a scenario, writes artifacts, returns (exit_code, error_text).");

  m.def(
      "execute",
      [](const std::string& scenario, std::optional<std::vector<std::string>> methods, bool welch) {
        Scenario sc = load_scenario(scenario);
        RunOptions opt;
        opt.methods = std::move(methods);
        opt.welch = welch;
        apply_overrides(sc, opt);
        ScenarioResult res;
        {
          py::gil_scoped_release nogil;
          res = execute_scenario(sc, nullptr);
        }
        py::dict d;
        d["pass"] = res.pass;
        d["summary"] = res.summary;
        d["freqs"] = res.baseline.grid.points;
        d["baseline"] = res.baseline.values;
        if (res.precoder_equivalence) d["precoder_equivalence"] = *res.precoder_equivalence;
        if (res.welch_deviation_db) d["welch_deviation_db"] = *res.welch_deviation_db;
        py::list ms;
        for (const auto& mr : res.methods) ms.append(method_dict(mr));
        d["methods"] = ms;
        return d;
      },
      py::arg("scenario"), py::arg("methods") = py::none(), py::arg("welch") = false);

  m.def(
      "baseline_waveform",
      [](const std::string& scenario, int symbols, const std::string& kind, std::uint64_t seed) {
        const Scenario sc = load_scenario(scenario);
        const PulseFamily fam = family(sc.fft_size, sc.guard, sc.beta, to_string(sc.window), kind);
        const ShaperSolution sol = baseline_solution(fam.config(), sc.aic_data(), fam.kind());
        const SymbolStream st = random_symbols(sol, sc.power, symbols, Constellation::Qpsk, seed);
        return synthesize(fam, sol, st).samples;
      },
      py::arg("scenario"), py::arg("symbols") = 16, py::arg("kind") = "hermitian", py::arg("seed") = 1);
}
