#include "ofdmshape/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ofdmshape {

const char* to_string(MethodType t) {
  switch (t) {
    case MethodType::AicAst: return "aic_ast";
    case MethodType::AicAstPeak: return "aic_ast_peak";
    case MethodType::Nullspace: return "nullspace";
    case MethodType::Weighted: return "weighted";
    case MethodType::Orthogonal: return "orthogonal";
    case MethodType::OrthogonalNotch: return "orthogonal_notch";
  }
  return "?";
}

MethodType parse_method_type(const std::string& name) {
  for (MethodType t : {MethodType::AicAst, MethodType::AicAstPeak, MethodType::Nullspace, MethodType::Weighted,
                       MethodType::Orthogonal, MethodType::OrthogonalNotch}) {
    if (name == to_string(t)) return t;
  }
  throw InvalidConfig("unknown method type '" + name + "'");
}

double MethodSpec::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidConfig(name + "." + key + ": '" + it->second + "' is not a number");
  }
}

std::vector<int> Scenario::passband() const {
  std::vector<char> in(static_cast<std::size_t>(std::max(fft_size, 0)), 0);
  for (const auto& [lo, hi] : notched_band) {
    for (int k = std::max(lo, 0); k <= std::min(hi, fft_size - 1); ++k) in[static_cast<std::size_t>(k)] = 1;
  }
  std::vector<int> out;
  for (int k = 0; k < fft_size; ++k) {
    if (!in[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

std::vector<int> Scenario::aic_data() const {
  if (data) return *data;
  const std::set<int> cc(cancel.begin(), cancel.end());
  std::vector<int> out;
  for (int k : passband()) {
    if (!cc.count(k)) out.push_back(k);
  }
  return out;
}

NotchSet Scenario::notch_set() const {
  NotchSet ns;
  for (double f : notch_freqs) ns.freqs.push_back(centered_notch_coordinates ? wrap_frequency(f + 0.5) : wrap_frequency(f));
  return ns;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  Reader(std::map<std::string, std::pair<std::string, int>> kv, std::string origin)
      : kv_(std::move(kv)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    line_ = it->second.second;
    std::string v = it->second.first;
    kv_.erase(it);
    return v;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw InvalidConfig(origin_ + ":" + std::to_string(line_) + ": " + key + ": " + msg);
  }

  long long integer(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      fail(key, "'" + v + "' is not an integer");
    }
  }

  double real(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      fail(key, "'" + v + "' is not a number");
    }
  }

  bool boolean(const std::string& key, const std::string& v) const {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(key, "'" + v + "' is not a boolean");
  }

  std::vector<CarrierRange> ranges(const std::string& key, const std::string& v) const {
    std::vector<CarrierRange> out;
    for (const std::string& item : split_list(v)) {
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        const int k = static_cast<int>(integer(key, item));
        out.emplace_back(k, k);
      } else {
        out.emplace_back(static_cast<int>(integer(key, trim(item.substr(0, dots)))),
                         static_cast<int>(integer(key, trim(item.substr(dots + 2)))));
      }
    }
    return out;
  }

  std::vector<int> ints(const std::string& key, const std::string& v) const {
    std::vector<int> out;
    for (const auto& [lo, hi] : ranges(key, v)) {
      if (hi < lo) fail(key, "descending range " + std::to_string(lo) + ".." + std::to_string(hi));
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    }
    return out;
  }

  std::vector<double> reals(const std::string& key, const std::string& v) const {
    std::vector<double> out;
    for (const std::string& item : split_list(v)) out.push_back(real(key, item));
    return out;
  }

  const std::map<std::string, std::pair<std::string, int>>& rest() const { return kv_; }

 private:
  std::map<std::string, std::pair<std::string, int>> kv_;
  std::string origin_;
  int line_ = 0;
};

bool is_method_type(const std::string& s) {
  try {
    parse_method_type(s);
    return true;
  } catch (const InvalidConfig&) {
    return false;
  }
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
    kv[key] = {trim(line.substr(eq + 1)), lineno};
  }

  Reader r(std::move(kv), origin);
  Scenario sc;
  auto need = [&](const char* key) {
    auto v = r.take(key);
    if (!v) throw InvalidConfig(origin + ": missing required key " + key);
    return *v;
  };
  sc.name = r.take("name").value_or("scenario");
  sc.fft_size = static_cast<int>(r.integer("fft_size", need("fft_size")));
  sc.guard = static_cast<int>(r.integer("guard", need("guard")));
  if (auto v = r.take("beta")) sc.beta = static_cast<int>(r.integer("beta", *v));
  if (auto v = r.take("window")) sc.window = parse_window_shape(*v);
  if (auto v = r.take("precoder_beta")) sc.precoder_beta = static_cast<int>(r.integer("precoder_beta", *v));
  if (auto v = r.take("precoder_window")) sc.precoder_window = parse_window_shape(*v);
  if (auto v = r.take("grid_density")) sc.grid_density = static_cast<int>(r.integer("grid_density", *v));
  if (auto v = r.take("notched_band")) sc.notched_band = r.ranges("notched_band", *v);
  if (auto v = r.take("cancel")) sc.cancel = r.ints("cancel", *v);
  if (auto v = r.take("data")) sc.data = r.ints("data", *v);
  if (auto v = r.take("notch_freqs")) sc.notch_freqs = r.reals("notch_freqs", *v);
  if (auto v = r.take("notch_coordinates")) {
    if (*v == "centered") {
      sc.centered_notch_coordinates = true;
    } else if (*v == "internal") {
      sc.centered_notch_coordinates = false;
    } else {
      r.fail("notch_coordinates", "expected centered or internal");
    }
  }
  if (auto v = r.take("rate")) {
    sc.rate_text = *v;
    const auto slash = v->find('/');
    if (slash == std::string::npos) {
      sc.rate = r.real("rate", *v);
    } else {
      const double num = r.real("rate", trim(v->substr(0, slash)));
      const double den = r.real("rate", trim(v->substr(slash + 1)));
      if (!(den > 0.0)) r.fail("rate", "denominator must be positive");
      sc.rate = num / den;
    }
  }
  if (auto v = r.take("power.default")) sc.power.default_variance = r.real("power.default", *v);
  if (auto v = r.take("seed")) sc.seed = static_cast<std::uint64_t>(r.integer("seed", *v));
  if (auto v = r.take("welch")) sc.welch = r.boolean("welch", *v);
  if (auto v = r.take("welch_symbols")) sc.welch_symbols = static_cast<int>(r.integer("welch_symbols", *v));
  if (auto v = r.take("welch_segment")) sc.welch_segment = static_cast<int>(r.integer("welch_segment", *v));
  if (auto v = r.take("harmonics")) sc.harmonics = static_cast<int>(r.integer("harmonics", *v));
  if (auto v = r.take("tolerance.psd")) sc.psd_tolerance = r.real("tolerance.psd", *v);
  if (auto v = r.take("tolerance.equivalence")) sc.equivalence_tolerance = r.real("tolerance.equivalence", *v);
  if (auto v = r.take("tolerance.realness")) sc.realness_tolerance = r.real("tolerance.realness", *v);
  if (auto v = r.take("unrestricted")) sc.unrestricted = r.boolean("unrestricted", *v);

  std::vector<std::string> names;
  if (auto v = r.take("methods")) names = split_list(*v);
  for (const std::string& n : names) {
    MethodSpec m;
    m.name = n;
    if (auto t = r.take(n + ".type")) {
      m.type = parse_method_type(*t);
    } else if (is_method_type(n)) {
      m.type = parse_method_type(n);
    } else {
      throw InvalidConfig(origin + ": method '" + n + "' needs a " + n + ".type entry");
    }
    sc.methods.push_back(std::move(m));
  }

  std::vector<std::string> unknown;
  for (const auto& [key, val] : r.rest()) {
    const auto dot = key.find('.');
    if (key.rfind("power.", 0) == 0) {
      sc.power.variance[static_cast<int>(r.integer(key, key.substr(6)))] = r.real(key, val.first);
      continue;
    }
    bool claimed = false;
    if (dot != std::string::npos) {
      for (MethodSpec& m : sc.methods) {
        if (key.substr(0, dot) == m.name) {
          m.params[key.substr(dot + 1)] = val.first;
          claimed = true;
        }
      }
    }
    if (!claimed) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = origin + ": unknown key";
    for (const auto& k : unknown) msg += " " + k;
    throw InvalidConfig(msg);
  }
  return sc;
}

namespace {

const char* kFig1 = R"(# Four-method comparison at N = 4096.
name = fig1
fft_size = 4096
guard = 1024
beta = 511
window = raised_cosine
# Precoders use a rectangular pulse; one extra sample keeps L odd.
precoder_beta = 1
precoder_window = rectangular
grid_density = 10
notched_band = 0..1024, 3022..3026, 3072..4095
# Three cancellation carriers per passband edge, two inside and one outside.
cancel = 1024, 1025, 1026, 3070, 3071, 3072
notch_coordinates = centered
notch_freqs = -0.250, -0.2501, -0.2502, -0.2515, -0.2518, 0.2378, 0.2379, 0.2380, 0.2385, 0.2386, 0.2387, 0.250, 0.2501, 0.2502, 0.2515, 0.2518
rate = 2026/2042
methods = aic_ast, aic_ast_peak, nullspace, orthogonal_notch, weighted, orthogonal
aic_ast.total_power_factor = 1.01
aic_ast.ridge_scale = 1e-8
aic_ast_peak.passband_power_factor = 1.0
aic_ast_peak.ridge_scale = 1e-8
weighted.weight_min = 1
weighted.weight_max = 2
seed = 1
welch_symbols = 10000
harmonics = 8
)";

const char* kToy = R"(# Desk-scale version of fig1.
name = toy
fft_size = 64
guard = 16
beta = 7
window = raised_cosine
precoder_beta = 1
precoder_window = rectangular
grid_density = 10
notched_band = 0..16, 40..41, 48..63
cancel = 16, 17, 18, 46, 47, 48
notch_coordinates = internal
# Mix of grid points and off-grid frequencies.
notch_freqs = 0.2578125, 0.26203125, -0.3828125, -0.359375, -0.35578125, -0.2578125
rate = 23/29
methods = aic_ast, aic_ast_peak, nullspace, orthogonal_notch, weighted, orthogonal
aic_ast.total_power_factor = 1.01
aic_ast_peak.passband_power_factor = 1.0
weighted.weight_min = 1
weighted.weight_max = 2
seed = 1
welch_symbols = 10000
harmonics = 4
)";

}  // namespace

std::string builtin_scenario_text(const std::string& name) {
  if (name == "fig1") return kFig1;
  if (name == "toy") return kToy;
  throw InvalidConfig("no built-in scenario '" + name + "'");
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name != "fig1" && name != "toy") return std::nullopt;
  std::istringstream in(builtin_scenario_text(name));
  return parse_scenario(in, name);
}

Scenario load_scenario(const std::string& path_or_builtin) {
  if (auto sc = builtin_scenario(path_or_builtin)) return *sc;
  std::ifstream in(path_or_builtin);
  if (!in) throw Error("cannot read scenario file '" + path_or_builtin + "'");
  return parse_scenario(in, path_or_builtin);
}

std::vector<std::string> validate_config(const Scenario& sc) {
  std::vector<std::string> diag;
  auto error = [&](const std::string& m) { diag.push_back("error: " + m); };
  auto note = [&](const std::string& m) { diag.push_back("note: " + m); };
  if (sc.fft_size < 2) error("fft_size must be at least 2");
  if (sc.guard < 0) error("guard must be non-negative");
  if (sc.beta < 0 || sc.precoder_beta < 0) error("beta must be non-negative");
  if (sc.grid_density < 1) error("grid_density must be at least 1");
  if (!diag.empty()) return diag;

  const int N = sc.fft_size;
  auto check_length = [&](const char* what, int beta, WindowShape shape) {
    int b = beta;
    if ((N + sc.guard + b) % 2 == 0) {
      note(std::string(what) + ": beta extended from " + std::to_string(b) + " to " + std::to_string(b + 1) +
           " so that L is odd");
      ++b;
    }
    if (shape == WindowShape::RaisedCosine && 2 * b >= N + sc.guard + b) error(std::string(what) + ": taper longer than the pulse");
  };
  check_length("beta", sc.beta, sc.window);
  check_length("precoder_beta", sc.precoder_beta, sc.precoder_window);

  for (const auto& [lo, hi] : sc.notched_band) {
    if (lo < 0 || hi >= N || lo > hi) error("notched band " + std::to_string(lo) + ".." + std::to_string(hi) + " outside [0, N)");
  }
  std::set<int> seen;
  for (int k : sc.cancel) {
    if (k < 0 || k >= N) error("cancellation carrier " + std::to_string(k) + " outside [0, N)");
    if (!seen.insert(k).second) error("cancellation carrier " + std::to_string(k) + " listed twice");
  }
  const std::vector<int> data = sc.aic_data();
  std::set<int> dseen;
  for (int k : data) {
    if (k < 0 || k >= N) error("data carrier " + std::to_string(k) + " outside [0, N)");
    if (!dseen.insert(k).second) error("data carrier " + std::to_string(k) + " listed twice");
    if (seen.count(k)) error("carrier " + std::to_string(k) + " is both a data and a cancellation carrier");
  }

  const bool any_aic = std::any_of(sc.methods.begin(), sc.methods.end(), [](const MethodSpec& m) {
    return m.type == MethodType::AicAst || m.type == MethodType::AicAstPeak;
  });
  const bool any_notch = std::any_of(sc.methods.begin(), sc.methods.end(), [](const MethodSpec& m) {
    return m.type == MethodType::Nullspace || m.type == MethodType::Weighted || m.type == MethodType::OrthogonalNotch;
  });
  const bool any_orth = std::any_of(sc.methods.begin(), sc.methods.end(), [](const MethodSpec& m) {
    return m.type == MethodType::Orthogonal || m.type == MethodType::OrthogonalNotch;
  });
  if (sc.methods.empty()) error("no methods selected");
  if (any_aic && data.empty()) error("no data carriers for the AIC methods");
  if (any_aic && sc.notched_band.empty()) error("AIC methods need a notched band");
  const std::size_t K = sc.passband().size();
  if (any_notch) {
    if (sc.notch_freqs.empty()) error("notch methods need notch_freqs");
    if (!sc.notch_freqs.empty() && sc.notch_freqs.size() >= K) {
      error(std::to_string(sc.notch_freqs.size()) + " notch frequencies leave no null space over " + std::to_string(K) +
            " active carriers");
    }
  }
  if (any_orth) {
    const double d = sc.rate * static_cast<double>(K);
    if (!(sc.rate > 0.0 && sc.rate <= 1.0)) {
      error("rate must lie in (0, 1]");
    } else if (std::abs(d - std::nearbyint(d)) > 1e-9 * std::max(1.0, d)) {
      error("rate x |K| = " + std::to_string(d) + " is not an integer");
    }
  }
  for (const MethodSpec& m : sc.methods) {
    try {
      if (m.type == MethodType::Weighted) {
        const double lo = m.number("weight_min", 1.0), hi = m.number("weight_max", 2.0);
        if (!(lo > 0.0 && hi > 0.0)) error(m.name + ": weights must be positive");
      }
      if (m.type == MethodType::AicAst && !(m.number("total_power_factor", 1.01) > 0.0)) {
        error(m.name + ": total_power_factor must be positive");
      }
      if (m.type == MethodType::AicAstPeak && !(m.number("passband_power_factor", 1.0) > 0.0)) {
        error(m.name + ": passband_power_factor must be positive");
      }
      if (!(m.number("ridge_scale", 1e-12) >= 0.0)) error(m.name + ": ridge_scale must be non-negative");
    } catch (const InvalidConfig& e) {
      error(e.what());
    }
  }
  if (sc.welch && sc.welch_symbols < 8) error("welch_symbols must be at least 8");
  if (sc.welch_segment < 1) error("welch_segment must be at least 1");
  if (sc.harmonics < 1) error("harmonics must be at least 1");
  return diag;
}

std::vector<std::string> validate_config_file(const std::string& path) {
  if (auto sc = builtin_scenario(path)) return validate_config(*sc);
  std::ifstream in(path);
  if (!in) throw Error("cannot read scenario file '" + path + "'");
  try {
    return validate_config(parse_scenario(in, path));
  } catch (const InvalidConfig& e) {
    return {std::string("error: ") + e.what()};
  }
}

}  // namespace ofdmshape
