#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ofdmshape/scenario.hpp"
#include "ofdmshape/synth.hpp"

using namespace ofdmshape;

int main(int argc, char** argv) {
  CLI::App app{"OFDM spectral shaping with conventional and Hermitian-symmetric pulses"};
  app.require_subcommand(1);

  std::string scenario;
  std::string output = "ofdmshape_out";
  int grid_density = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  bool welch = false;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario file or a built-in scenario (fig1, toy)");
  run->add_option("scenario", scenario, "Scenario file or built-in name")->required();
  run->add_option("--output,-o", output, "Output directory")->capture_default_str();
  auto* q_opt = run->add_option("--grid-density,-Q", grid_density, "Grid points per subcarrier spacing")
                    ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Random seed");
  auto* m_opt = run->add_option("--methods", methods, "Methods to run (comma separated)")->delimiter(',');
  run->add_flag("--welch", welch, "Add the empirical Welch PSD cross-check");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  std::string vpath;
  auto* validate = app.add_subcommand("validate", "Check a scenario without solving");
  validate->add_option("scenario", vpath, "Scenario file or built-in name")->required();

  std::string show;
  auto* print = app.add_subcommand("print", "Print a built-in scenario");
  print->add_option("name", show, "fig1 or toy")->required();

  std::string wf_scenario, wf_out, wf_format = "csv";
  int wf_symbols = 16;
  std::string wf_kind = "hermitian";
  auto* wave = app.add_subcommand("waveform", "Export a baseline waveform of a scenario");
  wave->add_option("scenario", wf_scenario, "Scenario file or built-in name")->required();
  wave->add_option("--out", wf_out, "Output file")->required();
  wave->add_option("--format", wf_format, "csv or raw")->check(CLI::IsMember({"csv", "raw"}))->capture_default_str();
  wave->add_option("--symbols", wf_symbols, "Number of OFDM symbols")->check(CLI::PositiveNumber)->capture_default_str();
  wave->add_option("--pulse", wf_kind, "hermitian or conventional")->capture_default_str();
  auto* wf_seed = wave->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*run) {
    RunOptions opt;
    if (*q_opt) opt.grid_density = grid_density;
    if (*seed_opt) opt.seed = seed;
    if (*m_opt) opt.methods = methods;
    opt.welch = welch;
    if (!quiet) opt.log = &std::cout;
    const int code = run_scenario(scenario, output, opt, std::cerr);
    if (code == 0) std::cout << "artifacts written to " << output << "\n";
    if (code == 3) std::cerr << "one or more checks failed; see " << output << "/summary.txt\n";
    return code;
  }
  if (*validate) {
    try {
      const auto diag = validate_config_file(vpath);
      int errors = 0;
      for (const auto& d : diag) {
        std::cout << d << "\n";
        if (d.rfind("error: ", 0) == 0) ++errors;
      }
      if (diag.empty()) std::cout << "no diagnostics\n";
      return errors ? 1 : 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (*print) {
    try {
      std::cout << builtin_scenario_text(show);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  if (*wave) {
    try {
      const Scenario sc = load_scenario(wf_scenario);
      const PulseKind kind = parse_pulse_kind(wf_kind);
      const SystemConfig cfg = SystemConfig::make(sc.fft_size, sc.guard, sc.beta);
      const PulseFamily fam(cfg, make_window(cfg, sc.window), kind);
      const ShaperSolution sol = baseline_solution(cfg, sc.aic_data(), kind);
      const SymbolStream st =
          random_symbols(sol, sc.power, wf_symbols, Constellation::Qpsk, *wf_seed ? seed : sc.seed);
      const Waveform wf = synthesize(fam, sol, st);
      std::ofstream out(wf_out, std::ios::binary);
      if (!out) throw Error("cannot write " + wf_out);
      if (wf_format == "csv") {
        write_waveform_csv(out, wf);
      } else {
        write_waveform_raw(out, wf);
      }
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
