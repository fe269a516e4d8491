#include "ofdmshape/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ofdmshape {

Infeasible::Infeasible(std::string mask, double bound, double attainable)
    : Error("constraint '" + mask + "' is infeasible: bound " + std::to_string(bound) +
            " is below the smallest attainable value " + std::to_string(attainable)),
      mask_(std::move(mask)),
      bound_(bound),
      attainable_(attainable) {}

const char* to_string(PulseKind kind) {
  return kind == PulseKind::Conventional ? "conventional" : "hermitian";
}

PulseKind parse_pulse_kind(const std::string& name) {
  if (name == "conventional") return PulseKind::Conventional;
  if (name == "hermitian") return PulseKind::Hermitian;
  throw InvalidConfig("unknown pulse kind '" + name + "'");
}

const char* to_string(WindowShape shape) {
  return shape == WindowShape::Rectangular ? "rectangular" : "raised_cosine";
}

WindowShape parse_window_shape(const std::string& name) {
  if (name == "rectangular" || name == "rect") return WindowShape::Rectangular;
  if (name == "raised_cosine" || name == "rc") return WindowShape::RaisedCosine;
  throw InvalidConfig("unknown window shape '" + name + "'");
}

SystemConfig SystemConfig::make(int fft_size, int guard, int beta, ParityPolicy parity) {
  SystemConfig cfg;
  cfg.fft_size = fft_size;
  cfg.guard = guard;
  cfg.beta = beta;
  cfg.validate();
  if (parity == ParityPolicy::ForceOdd && !cfg.odd_length()) {
    std::ostringstream note;
    note << "beta extended from " << beta << " to " << beta + 1 << " so that L = N + N_GI + beta is odd";
    cfg.beta = beta + 1;
    cfg.notes.push_back(note.str());
  }
  return cfg;
}

int SystemConfig::center() const {
  if (!odd_length()) {
    throw PreconditionViolation("pulse length L = " + std::to_string(length()) +
                                " is even; the Hermitian pulse needs an odd L");
  }
  return (length() - 1) / 2;
}

int SystemConfig::cyclic_shift() const { return center() - guard; }

void SystemConfig::validate() const {
  if (fft_size < 1) throw InvalidConfig("N must be positive");
  if (guard < 0) throw InvalidConfig("N_GI must be non-negative");
  if (beta < 0) throw InvalidConfig("beta must be non-negative");
}

std::vector<int> CarrierSets::active() const {
  std::vector<int> k(data);
  k.insert(k.end(), cancel.begin(), cancel.end());
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

void CarrierSets::validate(int fft_size) const {
  std::set<int> seen;
  auto check = [&](int k, const char* which) {
    if (k < 0 || k >= fft_size) {
      throw InvalidConfig(std::string(which) + " carrier " + std::to_string(k) + " outside [0, N)");
    }
  };
  for (int k : data) {
    check(k, "data");
    if (!seen.insert(k).second) throw InvalidConfig("duplicate data carrier " + std::to_string(k));
  }
  std::set<int> cancel_seen;
  for (int k : cancel) {
    check(k, "cancellation");
    if (!cancel_seen.insert(k).second) {
      throw InvalidConfig("duplicate cancellation carrier " + std::to_string(k));
    }
    if (seen.count(k)) {
      throw InvalidConfig("carrier " + std::to_string(k) + " is both a data and a cancellation carrier");
    }
  }
}

double PowerAllocation::of(int carrier) const {
  auto it = variance.find(carrier);
  return it == variance.end() ? default_variance : it->second;
}

void PowerAllocation::validate(std::span<const int> carriers) const {
  for (int k : carriers) {
    if (!(of(k) > 0.0)) {
      throw InvalidConfig("variance of carrier " + std::to_string(k) + " must be positive");
    }
  }
}

Window make_window(const SystemConfig& cfg, WindowShape shape) {
  cfg.validate();
  const int L = cfg.length();
  Window win;
  win.beta = cfg.beta;
  win.shape = shape;
  win.samples.assign(static_cast<std::size_t>(L), 1.0);
  if (shape == WindowShape::Rectangular) return win;

  if (2 * cfg.beta >= L) {
    throw InvalidConfig("beta = " + std::to_string(cfg.beta) + " leaves no flat top for L = " +
                        std::to_string(L));
  }
  const double denom = cfg.beta + 1.0;
  for (int n = 0; n < cfg.beta; ++n) {
    const double v = 0.5 * (1.0 - std::cos(M_PI * (n + 1) / denom));
    win.samples[static_cast<std::size_t>(n)] = v;
    win.samples[static_cast<std::size_t>(L - 1 - n)] = v;
  }
  return win;
}

namespace {

void check_carrier(const SystemConfig& cfg, int k) {
  if (k < 0 || k >= cfg.fft_size) {
    throw IndexError("carrier " + std::to_string(k) + " outside [0, " + std::to_string(cfg.fft_size) + ")");
  }
}

void check_window(const SystemConfig& cfg, const Window& win) {
  if (win.length() != cfg.length()) {
    throw DimensionMismatch("window length " + std::to_string(win.length()) +
                            " does not match L = " + std::to_string(cfg.length()));
  }
}

cplx unit_root(std::int64_t r, std::int64_t n) {
  const double angle = kTwoPi * static_cast<double>(r) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

Pulse conventional_pulse(const SystemConfig& cfg, const Window& win, int k) {
  check_carrier(cfg, k);
  check_window(cfg, win);
  const int L = cfg.length();
  Pulse p;
  p.carrier = k;
  p.kind = PulseKind::Conventional;
  p.time_offset = 0;
  p.samples.resize(static_cast<std::size_t>(L));
  for (int n = 0; n < L; ++n) {
    const std::int64_t r = mod_floor(static_cast<std::int64_t>(k) * (n - cfg.guard), cfg.fft_size);
    p.samples[static_cast<std::size_t>(n)] = win.samples[static_cast<std::size_t>(n)] * unit_root(r, cfg.fft_size);
  }
  return p;
}

Pulse hermitian_pulse(const SystemConfig& cfg, const Window& win, int k) {
  check_carrier(cfg, k);
  check_window(cfg, win);
  const int eta = cfg.center();
  Pulse p;
  p.carrier = k;
  p.kind = PulseKind::Hermitian;
  p.time_offset = -eta;
  p.samples.resize(static_cast<std::size_t>(cfg.length()));
  for (int n = 0; n <= eta; ++n) {
    const std::int64_t r = mod_floor(static_cast<std::int64_t>(k) * n, cfg.fft_size);
    const cplx v = win.samples[static_cast<std::size_t>(eta + n)] * unit_root(r, cfg.fft_size);
    p.samples[static_cast<std::size_t>(eta + n)] = v;
    p.samples[static_cast<std::size_t>(eta - n)] = std::conj(v);
  }
  return p;
}

double wrap_frequency(double f) {
  double w = f - std::floor(f + 0.5);
  if (w >= 0.5) w -= 1.0;
  return w;
}

cplx spectrum_at(const Pulse& p, double f) {
  f = wrap_frequency(f);
  const int L = static_cast<int>(p.samples.size());
  auto term = [&](int m) {
    const double t = static_cast<double>(m + p.time_offset);
    double x = f * t;
    x -= std::nearbyint(x);
    return p.samples[static_cast<std::size_t>(m)] * std::polar(1.0, -kTwoPi * x);
  };
  // Symmetric pairs around the middle sample are added first; for a
  // conjugate-symmetric pulse centred on the time origin each pair sum is
  // real.
  cplx acc{0.0, 0.0};
  for (int lo = 0, hi = L - 1; lo <= hi; ++lo, --hi) {
    if (lo == hi) {
      acc += term(lo);
    } else {
      acc += term(lo) + term(hi);
    }
  }
  return acc;
}

PulseFamily::PulseFamily(SystemConfig cfg, Window win, PulseKind kind)
    : cfg_(std::move(cfg)), win_(std::move(win)), kind_(kind) {
  cfg_.validate();
  check_window(cfg_, win_);
  for (int n = 0; n < win_.length(); ++n) {
    if (win_.samples[static_cast<std::size_t>(n)] != win_.samples[static_cast<std::size_t>(win_.length() - 1 - n)]) {
      throw InvalidConfig("window is not symmetric");
    }
  }
  if (kind_ == PulseKind::Hermitian) {
    phase_ref_ = cfg_.center();
    time_offset_ = -phase_ref_;
  } else {
    phase_ref_ = cfg_.guard;
    time_offset_ = 0;
  }
}

Pulse PulseFamily::pulse(int k) const {
  return kind_ == PulseKind::Hermitian ? hermitian_pulse(cfg_, win_, k) : conventional_pulse(cfg_, win_, k);
}

double PulseFamily::window_transform(double nu) const {
  const int L = cfg_.length();
  double acc = 0.0;
  for (int n = 0; 2 * n < L - 1; ++n) {
    // n - c = -(L - 1 - 2n) / 2
    double x = nu * (0.5 * (L - 1 - 2 * n));
    x -= std::nearbyint(x);
    acc += 2.0 * win_.samples[static_cast<std::size_t>(n)] * std::cos(kTwoPi * x);
  }
  if (L % 2 == 1) acc += win_.samples[static_cast<std::size_t>((L - 1) / 2)];
  return acc;
}

cplx PulseFamily::spectrum(int k, double f) const {
  check_carrier(cfg_, k);
  const double nu = wrap_frequency(f - static_cast<double>(k) / cfg_.fft_size);
  const double amp = window_transform(nu);
  if (kind_ == PulseKind::Hermitian) return {amp, 0.0};
  // P_k(f) = e^{-j2pi k N_GI / N} e^{-j2pi nu c} W(nu), c = (L - 1) / 2
  const std::int64_t r = mod_floor(-static_cast<std::int64_t>(k) * cfg_.guard, cfg_.fft_size);
  double x = nu * (0.5 * (cfg_.length() - 1));
  x -= std::nearbyint(x);
  return amp * unit_root(r, cfg_.fft_size) * std::polar(1.0, -kTwoPi * x);
}

PulseBank::PulseBank(const PulseFamily& family, std::span<const int> carriers) : kind_(family.kind()) {
  pulses_.reserve(carriers.size());
  for (int k : carriers) {
    if (index_.count(k)) continue;
    index_[k] = pulses_.size();
    pulses_.push_back(family.pulse(k));
  }
}

const Pulse& PulseBank::at(int carrier) const {
  auto it = index_.find(carrier);
  if (it == index_.end()) throw IndexError("no pulse for carrier " + std::to_string(carrier));
  return pulses_[it->second];
}

}  // namespace ofdmshape
