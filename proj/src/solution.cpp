#include "ofdmshape/solution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ofdmshape {

const char* to_string(ShaperKind kind) {
  switch (kind) {
    case ShaperKind::Baseline: return "baseline";
    case ShaperKind::Aic: return "aic";
    case ShaperKind::Precoder: return "precoder";
    case ShaperKind::Ast: return "ast";
    case ShaperKind::AicAst: return "aic_ast";
  }
  return "?";
}

ShaperKind parse_shaper_kind(const std::string& name) {
  for (auto k : {ShaperKind::Baseline, ShaperKind::Aic, ShaperKind::Precoder, ShaperKind::Ast, ShaperKind::AicAst}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidConfig("unknown solution kind '" + name + "'");
}

std::vector<int> ShaperSolution::carriers() const {
  if (kind == ShaperKind::Precoder) return active;
  std::vector<int> rows(streams);
  if (has_aic()) rows.insert(rows.end(), cancel.begin(), cancel.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

Eigen::MatrixXcd ShaperSolution::carrier_matrix() const {
  if (kind == ShaperKind::Precoder) return precoder;
  const std::vector<int> rows = carriers();
  auto row_of = [&](int carrier) {
    return static_cast<Eigen::Index>(std::lower_bound(rows.begin(), rows.end(), carrier) - rows.begin());
  };
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()), stream_count());
  for (int s = 0; s < stream_count(); ++s) {
    m(row_of(streams[static_cast<std::size_t>(s)]), s) = 1.0;
    if (has_aic()) {
      for (std::size_t i = 0; i < cancel.size(); ++i) {
        m(row_of(cancel[i]), s) += aic(static_cast<Eigen::Index>(i), s);
      }
    }
  }
  return m;
}

void ShaperSolution::check() const {
  const auto ns = static_cast<Eigen::Index>(streams.size());
  auto fail = [](const std::string& what) { throw DimensionMismatch("solution: " + what); };
  if (kind == ShaperKind::Precoder) {
    if (precoder.rows() != static_cast<Eigen::Index>(active.size()) || precoder.cols() != ns) {
      fail("precoder is not |K| x |D|");
    }
  } else {
    for (int k : streams) {
      if (k < 0) fail("stream without carrier in a non-precoder solution");
    }
    if (precoder.size() != 0) fail("precoder populated for a non-precoder solution");
  }
  if (has_aic()) {
    if (aic.rows() != static_cast<Eigen::Index>(cancel.size()) || aic.cols() != ns) fail("AIC table is not |C| x |D|");
  } else if (aic.size() != 0) {
    fail("AIC table populated for a solution without AIC");
  }
  if (has_transitions()) {
    if (transitions.rows() != 2 * beta || transitions.cols() != ns) fail("transitions are not 2 beta x |D|");
  } else if (transitions.size() != 0) {
    fail("transitions populated for a solution without AST");
  }
}

std::vector<int> transition_support(int length, int beta) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(2 * beta));
  for (int n = 0; n < beta; ++n) idx.push_back(n);
  for (int n = length - beta; n < length; ++n) idx.push_back(n);
  return idx;
}

ShaperSolution baseline_solution(const SystemConfig& cfg, std::span<const int> data, PulseKind kind) {
  ShaperSolution sol;
  sol.kind = ShaperKind::Baseline;
  sol.pulse_kind = kind;
  sol.fft_size = cfg.fft_size;
  sol.length = cfg.length();
  sol.beta = cfg.beta;
  sol.streams.assign(data.begin(), data.end());
  sol.realness.real = true;
  return sol;
}

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

RealnessCertificate measure_realness(const ShaperSolution& sol) {
  RealnessCertificate cert;
  double cmax = 0.0, imax = 0.0;
  for (const Eigen::MatrixXcd* m : {&sol.precoder, &sol.aic}) {
    if (m->size() == 0) continue;
    cmax = std::max(cmax, max_abs(*m));
    imax = std::max(imax, m->imag().cwiseAbs().maxCoeff());
  }
  cert.coefficient_imag = cmax > 0.0 ? imax / cmax : 0.0;

  const auto& t = sol.transitions;
  if (t.size() != 0) {
    const double tmax = max_abs(t);
    double asym = 0.0;
    const Eigen::Index rows = t.rows();
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        asym = std::max(asym, std::abs(t(r, c) - std::conj(t(rows - 1 - r, c))));
      }
    }
    cert.transition_asymmetry = tmax > 0.0 ? asym / tmax : 0.0;
  }
  return cert;
}

void certify(ShaperSolution& sol, double threshold) {
  sol.realness = measure_realness(sol);
  if (sol.realness.value() > threshold) {
    sol.realness.real = false;
    return;
  }
  if (sol.precoder.size()) sol.precoder = sol.precoder.real().cast<cplx>();
  if (sol.aic.size()) sol.aic = sol.aic.real().cast<cplx>();
  if (sol.transitions.size()) {
    const Eigen::MatrixXcd t = sol.transitions;
    const Eigen::Index rows = t.rows();
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        sol.transitions(r, c) = 0.5 * (t(r, c) + std::conj(t(rows - 1 - r, c)));
      }
    }
  }
  sol.realness.real = true;
}

CompositeBuilder::CompositeBuilder(const PulseFamily& family, const ShaperSolution& sol)
    : family_(&family),
      sol_(&sol),
      carriers_(sol.carriers()),
      amplitudes_(sol.carrier_matrix()),
      support_(sol.has_transitions() ? transition_support(sol.length, sol.beta) : std::vector<int>{}),
      length_(family.length()),
      ifft_(family.config().fft_size, FftDirection::Backward),
      scratch_(static_cast<std::size_t>(family.config().fft_size)) {
  sol.check();
  if (sol.length != family.length() || sol.fft_size != family.config().fft_size) {
    throw DimensionMismatch("solution was built for a different system configuration");
  }
  if (sol.pulse_kind != family.kind()) {
    throw PreconditionViolation(std::string("solution uses ") + to_string(sol.pulse_kind) + " pulses, family is " +
                                to_string(family.kind()));
  }
}

void CompositeBuilder::column(int s, std::span<cplx> out) const {
  if (static_cast<int>(out.size()) != length_) throw DimensionMismatch("composite column buffer");
  const int N = family_->config().fft_size;
  std::fill(scratch_.begin(), scratch_.end(), cplx{});
  for (std::size_t r = 0; r < carriers_.size(); ++r) {
    scratch_[static_cast<std::size_t>(carriers_[r])] += amplitudes_(static_cast<Eigen::Index>(r), s);
  }
  ifft_.execute(scratch_);
  const auto& w = family_->window().samples;
  const int ref = family_->phase_reference();
  for (int m = 0; m < length_; ++m) {
    out[static_cast<std::size_t>(m)] =
        w[static_cast<std::size_t>(m)] * scratch_[static_cast<std::size_t>(mod_floor(m - ref, N))];
  }
  for (std::size_t r = 0; r < support_.size(); ++r) {
    out[static_cast<std::size_t>(support_[r])] += sol_->transitions(static_cast<Eigen::Index>(r), s);
  }
}

Eigen::MatrixXcd composite_matrix(const PulseBank& bank, const ShaperSolution& sol) {
  sol.check();
  if (bank.kind() != sol.pulse_kind) throw PreconditionViolation("pulse bank kind differs from solution");
  const std::vector<int> rows = sol.carriers();
  const Eigen::Index L = sol.length;
  Eigen::MatrixXcd P(L, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Pulse& p = bank.at(rows[r]);
    if (static_cast<Eigen::Index>(p.samples.size()) != L) throw DimensionMismatch("pulse length");
    P.col(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::VectorXcd>(p.samples.data(), L);
  }
  Eigen::MatrixXcd H = P * sol.carrier_matrix();
  if (sol.has_transitions()) {
    const std::vector<int> support = transition_support(sol.length, sol.beta);
    for (std::size_t r = 0; r < support.size(); ++r) {
      H.row(support[r]) += sol.transitions.row(static_cast<Eigen::Index>(r));
    }
  }
  return H;
}

namespace {

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) v.push_back(std::stoi(item));
  }
  return v;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_block(std::ostream& out, const char* name, const Eigen::MatrixXcd& m, const std::vector<int>& row_ids) {
  out << '[' << name << "]\n";
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const cplx v = m(i, k);
      out << row_ids[static_cast<std::size_t>(i)] << ',' << k << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
    }
  }
}

}  // namespace

void write_solution(std::ostream& out, const ShaperSolution& sol) {
  sol.check();
  out << "ofdmshape-solution 1\n";
  out << "kind=" << to_string(sol.kind) << '\n';
  out << "pulse_kind=" << to_string(sol.pulse_kind) << '\n';
  out << "fft_size=" << sol.fft_size << '\n';
  out << "length=" << sol.length << '\n';
  out << "beta=" << sol.beta << '\n';
  const Eigen::MatrixXcd& main = sol.kind == ShaperKind::Precoder ? sol.precoder
                                 : sol.has_aic()                  ? sol.aic
                                                                  : sol.transitions;
  out << "dims=" << main.rows() << 'x' << main.cols() << '\n';
  out << "realness=" << fmt(sol.realness.value()) << '\n';
  out << "coefficient_imag=" << fmt(sol.realness.coefficient_imag) << '\n';
  out << "transition_asymmetry=" << fmt(sol.realness.transition_asymmetry) << '\n';
  out << "real=" << (sol.realness.real ? 1 : 0) << '\n';
  out << "real_unknowns=" << sol.real_unknowns << '\n';
  out << "streams=" << join(sol.streams) << '\n';
  out << "active=" << join(sol.active) << '\n';
  out << "cancel=" << join(sol.cancel) << '\n';
  if (sol.kind == ShaperKind::Precoder) write_block(out, "precoder", sol.precoder, sol.active);
  if (sol.has_aic()) write_block(out, "aic", sol.aic, sol.cancel);
  if (sol.has_transitions()) write_block(out, "transitions", sol.transitions, transition_support(sol.length, sol.beta));
}

ShaperSolution read_solution(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ofdmshape-solution 1") throw InvalidConfig("not an ofdmshape solution file");
  std::map<std::string, std::string> header;
  std::string section;
  std::map<std::string, std::vector<std::array<double, 4>>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    if (section.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InvalidConfig("malformed header line '" + line + "'");
      header[line.substr(0, eq)] = line.substr(eq + 1);
      continue;
    }
    std::array<double, 4> r{};
    std::stringstream ss(line);
    std::string cell;
    for (double& x : r) {
      if (!std::getline(ss, cell, ',')) throw InvalidConfig("malformed coefficient row '" + line + "'");
      x = std::stod(cell);
    }
    rows[section].push_back(r);
  }
  auto get = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw InvalidConfig("solution file lacks '" + key + "'");
    return it->second;
  };
  ShaperSolution sol;
  sol.kind = parse_shaper_kind(get("kind"));
  sol.pulse_kind = parse_pulse_kind(get("pulse_kind"));
  sol.fft_size = std::stoi(get("fft_size"));
  sol.length = std::stoi(get("length"));
  sol.beta = std::stoi(get("beta"));
  sol.realness.coefficient_imag = std::stod(get("coefficient_imag"));
  sol.realness.transition_asymmetry = std::stod(get("transition_asymmetry"));
  sol.realness.real = get("real") == "1";
  sol.real_unknowns = std::stoi(get("real_unknowns"));
  sol.streams = split_ints(get("streams"));
  sol.active = split_ints(get("active"));
  sol.cancel = split_ints(get("cancel"));

  auto fill = [&](const char* name, Eigen::MatrixXcd& m, const std::vector<int>& row_ids) {
    m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(row_ids.size()), sol.stream_count());
    std::map<int, Eigen::Index> pos;
    for (std::size_t i = 0; i < row_ids.size(); ++i) pos[row_ids[i]] = static_cast<Eigen::Index>(i);
    for (const auto& r : rows[name]) {
      const auto it = pos.find(static_cast<int>(r[0]));
      const auto k = static_cast<Eigen::Index>(r[1]);
      if (it == pos.end() || k < 0 || k >= m.cols()) throw InvalidConfig(std::string("bad row in [") + name + "]");
      m(it->second, k) = cplx(r[2], r[3]);
    }
  };
  if (sol.kind == ShaperKind::Precoder) fill("precoder", sol.precoder, sol.active);
  if (sol.has_aic()) fill("aic", sol.aic, sol.cancel);
  if (sol.has_transitions()) fill("transitions", sol.transitions, transition_support(sol.length, sol.beta));
  sol.check();
  return sol;
}

}  // namespace ofdmshape
