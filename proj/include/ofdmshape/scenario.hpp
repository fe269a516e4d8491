#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ofdmshape/complexity.hpp"
#include "ofdmshape/core.hpp"
#include "ofdmshape/shapers.hpp"
#include "ofdmshape/solution.hpp"
#include "ofdmshape/spectrum.hpp"

namespace ofdmshape {

/// Method types understood by the scenario runner.
enum class MethodType { AicAst, AicAstPeak, Nullspace, Weighted, Orthogonal, OrthogonalNotch };

const char* to_string(MethodType t);
MethodType parse_method_type(const std::string& name);

struct MethodSpec {
  std::string name;
  MethodType type = MethodType::AicAst;
  /// `<name>.<key> = value` entries, key without the prefix.
  std::map<std::string, std::string> params;

  double number(const std::string& key, double fallback) const;
};

/// Flat `key = value` configuration. Lists are comma separated; integer
/// lists accept `a..b` ranges. `#` starts a comment.
struct Scenario {
  std::string name;
  int fft_size = 0;
  int guard = 0;
  int beta = 0;                 ///< transition length for AIC/AST methods
  WindowShape window = WindowShape::RaisedCosine;
  int precoder_beta = 0;        ///< precoders use their own (rectangular) window
  WindowShape precoder_window = WindowShape::Rectangular;
  int grid_density = 10;        ///< Q
  std::vector<CarrierRange> notched_band;  ///< B
  std::vector<int> cancel;      ///< cancellation carriers for AIC methods
  std::optional<std::vector<int>> data;  ///< AIC data carriers; default passband minus cancel
  std::vector<double> notch_freqs;
  bool centered_notch_coordinates = true;  ///< phi measured from the band centre
  double rate = 1.0;            ///< lambda
  std::string rate_text;
  PowerAllocation power;
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 1;
  bool welch = false;
  int welch_symbols = 10000;
  int welch_segment = 16;       ///< Welch segment length in units of L
  int harmonics = 8;            ///< b, harmonic AST complexity rows
  double psd_tolerance = 1e-9;
  double equivalence_tolerance = 1e-6;
  double realness_tolerance = kRealnessThreshold;
  bool unrestricted = true;     ///< also solve without the real formulation
  std::vector<std::string> notes;

  /// Carriers outside B.
  std::vector<int> passband() const;
  /// Explicit data list, or passband minus cancel.
  std::vector<int> aic_data() const;
  /// phi converted to the internal [-1/2, 1/2) axis.
  NotchSet notch_set() const;
};

Scenario parse_scenario(std::istream& in, const std::string& origin = "<input>");
Scenario load_scenario(const std::string& path_or_builtin);
/// Built-in scenarios: `fig1` and `toy`.
std::optional<Scenario> builtin_scenario(const std::string& name);
std::string builtin_scenario_text(const std::string& name);

/// Invariant violations and informational notes, without solving.
std::vector<std::string> validate_config(const Scenario& sc);
std::vector<std::string> validate_config_file(const std::string& path);

struct MethodResult {
  MethodSpec spec;
  ShaperSolution hermitian;
  ShaperSolution conventional;
  ShaperSolution transformed;
  std::optional<ShaperSolution> unrestricted;
  PsdCurve psd_hermitian;
  PsdCurve psd_conventional;
  PsdCurve psd_transformed;
  /// Relative PSD differences, Hermitian vs conventional solve and vs the
  /// transformed Hermitian solution. The plain figures count grid points that
  /// coincide with an imposed exact null as 0/0; the strict ones do not.
  double diff_independent = 0.0;
  double diff_transform = 0.0;
  double diff_independent_strict = 0.0;
  double diff_transform_strict = 0.0;
  double magnitude_error = 0.0;  ///< max ||g_conv| - |g_herm|| / max |g|
  double notch_power_db = 0.0;   ///< masked notch power relative to baseline
  std::vector<ComplexityReport> complexity;
  double seconds = 0.0;
};

struct ScenarioResult {
  Scenario scenario;
  PsdCurve baseline;
  std::vector<MethodResult> methods;
  std::optional<double> precoder_equivalence;
  std::optional<double> welch_deviation_db;
  bool pass = true;
  std::vector<std::string> summary;
};

struct RunOptions {
  std::optional<int> grid_density;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> methods;
  bool welch = false;
  std::ostream* log = nullptr;
};

/// Applies command-line overrides to a scenario.
void apply_overrides(Scenario& sc, const RunOptions& opt);

/// Solves every method under both pulse kinds and collects all checks.
/// Throws InvalidConfig or Infeasible.
ScenarioResult execute_scenario(const Scenario& sc, std::ostream* log = nullptr);

/// Writes psd_<method>_<kind>.csv, psd_diff.csv, realness.csv,
/// complexity.csv and summary.txt.
void write_artifacts(const ScenarioResult& res, const std::filesystem::path& dir);

/// 0 on success (all checks pass), 2 on infeasibility, 1 on configuration
/// errors, 3 when a check fails.
int run_scenario(const std::string& path_or_builtin, const std::filesystem::path& dir, const RunOptions& opt,
                 std::ostream& err);

}  // namespace ofdmshape
