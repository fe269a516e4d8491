#include "ofdmshape/shapers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "ofdmshape/fft.hpp"
#include "quadratic.hpp"

namespace ofdmshape {

using detail::Mat;

void NotchSet::validate(std::size_t active_count) const {
  for (double f : freqs) {
    if (!(f >= -0.5 && f < 0.5)) throw InvalidConfig("notch frequency " + std::to_string(f) + " outside [-1/2, 1/2)");
  }
  if (!freqs.empty() && freqs.size() >= active_count) {
    throw InvalidConfig("notch set of " + std::to_string(freqs.size()) + " frequencies leaves no null space over " +
                        std::to_string(active_count) + " active carriers");
  }
}

double framework_objective(const PulseFamily& family, const ShaperSolution& sol, const SpectralMask& mask0,
                           const PowerAllocation& power) {
  const PsdCurve psd = analytic_psd(family, sol, power, mask0.grid);
  return masked_power(psd, mask0) * family.config().symbol_period();
}

namespace {

std::vector<double> mask_omega(const SpectralMask& mask) {
  mask.validate();
  if (!mask.grid.is_uniform()) throw GridMismatch("shaping masks need a uniform grid");
  std::vector<double> w = mask.grid.weights();
  for (std::size_t m = 0; m < w.size(); ++m) w[m] *= mask.weight[m];
  return w;
}

/// Y(tau) = sum_m X_m e^{j 2 pi f_m tau} on the uniform grid.
class Lagcorr {
 public:
  explicit Lagcorr(int qn) : fft_(qn, FftDirection::Backward), buf_(static_cast<std::size_t>(qn)) {}

  void run(std::span<const cplx> X) {
    std::copy(X.begin(), X.end(), buf_.begin());
    fft_.execute(buf_);
  }

  cplx at(std::int64_t tau) const {
    const cplx v = buf_[static_cast<std::size_t>(mod_floor(tau, fft_.size()))];
    return (tau % 2 != 0) ? -v : v;
  }

 private:
  Fft fft_;
  std::vector<cplx> buf_;
};

/// Cancellation carriers plus optional transition support.
struct Layout {
  std::vector<int> cancel;
  int beta = 0;
  std::vector<int> support;  // stored indices
  int time_offset = 0;
  int eta = 0;  // Hermitian only

  int nc() const { return static_cast<int>(cancel.size()); }
  int unknowns() const { return nc() + 2 * beta; }
};

template <class T>
struct Assembled {
  detail::QuadraticModel<T> model;
  double trace_equivalent = 0.0;  // complex-equivalent trace of the Gram
};

/// Complex formulation: x = [g_c; t(support)].
Assembled<cplx> assemble_complex(const GridSpectra& gs, const Layout& lay, std::span<const int> data,
                                 const std::vector<double>& omega) {
  const int qn = gs.grid().lattice_size();
  const int nc = lay.nc();
  const int nt = 2 * lay.beta;
  const int n = nc + nt;
  const auto S = static_cast<Eigen::Index>(data.size());
  Assembled<cplx> out;
  auto& md = out.model;
  md.gram = Mat<cplx>::Zero(n, n);
  md.cross = Mat<cplx>::Zero(n, S);
  md.constant = Eigen::VectorXd::Zero(S);

  std::vector<int> rows;
  for (int m = 0; m < qn; ++m) {
    if (omega[static_cast<std::size_t>(m)] != 0.0) rows.push_back(m);
  }
  std::vector<std::int64_t> tau(static_cast<std::size_t>(nt));
  for (int a = 0; a < nt; ++a) tau[static_cast<std::size_t>(a)] = lay.support[static_cast<std::size_t>(a)] + lay.time_offset;

  Lagcorr lc(qn);
  std::vector<cplx> X(static_cast<std::size_t>(qn));

  // Cancellation spectra restricted to masked rows.
  Mat<cplx> Pc(static_cast<Eigen::Index>(rows.size()), nc);
  for (int c = 0; c < nc; ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) Pc(static_cast<Eigen::Index>(r), c) = gs(lay.cancel[static_cast<std::size_t>(c)], rows[r]);
  }
  Eigen::VectorXd wr(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) wr(static_cast<Eigen::Index>(r)) = omega[static_cast<std::size_t>(rows[r])];
  const Mat<cplx> WPc = wr.asDiagonal() * Pc;
  if (nc) md.gram.topLeftCorner(nc, nc) = Pc.adjoint() * WPc;

  if (nt) {
    for (int m = 0; m < qn; ++m) X[static_cast<std::size_t>(m)] = omega[static_cast<std::size_t>(m)];
    lc.run(X);
    for (int a = 0; a < nt; ++a) {
      for (int b = 0; b < nt; ++b) {
        md.gram(nc + a, nc + b) = lc.at(tau[static_cast<std::size_t>(a)] - tau[static_cast<std::size_t>(b)]);
      }
    }
    for (int c = 0; c < nc; ++c) {
      std::fill(X.begin(), X.end(), cplx{});
      for (std::size_t r = 0; r < rows.size(); ++r) X[static_cast<std::size_t>(rows[r])] = WPc(static_cast<Eigen::Index>(r), c);
      lc.run(X);
      for (int a = 0; a < nt; ++a) {
        const cplx v = std::conj(lc.at(tau[static_cast<std::size_t>(a)]));
        md.gram(c, nc + a) = v;
        md.gram(nc + a, c) = std::conj(v);
      }
    }
  }

  Eigen::VectorXcd pk(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index s = 0; s < S; ++s) {
    const int k = data[static_cast<std::size_t>(s)];
    double c0 = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const cplx v = gs(k, rows[r]);
      pk(static_cast<Eigen::Index>(r)) = v;
      c0 += wr(static_cast<Eigen::Index>(r)) * std::norm(v);
    }
    md.constant(s) = c0;
    if (nc) md.cross.col(s).head(nc) = WPc.adjoint() * pk;
    if (nt) {
      std::fill(X.begin(), X.end(), cplx{});
      for (std::size_t r = 0; r < rows.size(); ++r) X[static_cast<std::size_t>(rows[r])] = wr(static_cast<Eigen::Index>(r)) * pk(static_cast<Eigen::Index>(r));
      lc.run(X);
      for (int a = 0; a < nt; ++a) md.cross(nc + a, s) = lc.at(tau[static_cast<std::size_t>(a)]);
    }
  }
  out.trace_equivalent = md.gram.diagonal().real().sum();
  return out;
}

/// Real formulation for Hermitian pulses: x = [g_c; a_p; b_p] with
/// t(n_p) = a_p + j b_p and t(-n_p) = a_p - j b_p.
Assembled<double> assemble_real(const GridSpectra& gs, const Layout& lay, std::span<const int> data,
                                const std::vector<double>& omega) {
  const int qn = gs.grid().lattice_size();
  const int nc = lay.nc();
  const int beta = lay.beta;
  const int n = nc + 2 * beta;
  const auto S = static_cast<Eigen::Index>(data.size());
  Assembled<double> out;
  auto& md = out.model;
  md.gram = Mat<double>::Zero(n, n);
  md.cross = Mat<double>::Zero(n, S);
  md.constant = Eigen::VectorXd::Zero(S);

  std::vector<int> rows;
  for (int m = 0; m < qn; ++m) {
    if (omega[static_cast<std::size_t>(m)] != 0.0) rows.push_back(m);
  }
  std::vector<std::int64_t> np(static_cast<std::size_t>(beta));
  for (int p = 0; p < beta; ++p) np[static_cast<std::size_t>(p)] = lay.eta - beta + 1 + p;

  Lagcorr lc(qn);
  std::vector<cplx> X(static_cast<std::size_t>(qn));

  Mat<double> Pc(static_cast<Eigen::Index>(rows.size()), nc);
  for (int c = 0; c < nc; ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) Pc(static_cast<Eigen::Index>(r), c) = gs.envelope(lay.cancel[static_cast<std::size_t>(c)], rows[r]);
  }
  Eigen::VectorXd wr(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) wr(static_cast<Eigen::Index>(r)) = omega[static_cast<std::size_t>(rows[r])];
  const Mat<double> WPc = wr.asDiagonal() * Pc;
  if (nc) md.gram.topLeftCorner(nc, nc) = Pc.transpose() * WPc;

  const int ia = nc, ib = nc + beta;
  if (beta) {
    for (int m = 0; m < qn; ++m) X[static_cast<std::size_t>(m)] = omega[static_cast<std::size_t>(m)];
    lc.run(X);
    for (int p = 0; p < beta; ++p) {
      for (int q = 0; q < beta; ++q) {
        const cplx dm = lc.at(np[static_cast<std::size_t>(p)] - np[static_cast<std::size_t>(q)]);
        const cplx dp = lc.at(np[static_cast<std::size_t>(p)] + np[static_cast<std::size_t>(q)]);
        md.gram(ia + p, ia + q) = 2.0 * (dm.real() + dp.real());
        md.gram(ib + p, ib + q) = 2.0 * (dm.real() - dp.real());
        md.gram(ia + p, ib + q) = 2.0 * (dp.imag() - dm.imag());
        md.gram(ib + q, ia + p) = md.gram(ia + p, ib + q);
      }
    }
    for (int c = 0; c < nc; ++c) {
      std::fill(X.begin(), X.end(), cplx{});
      for (std::size_t r = 0; r < rows.size(); ++r) X[static_cast<std::size_t>(rows[r])] = WPc(static_cast<Eigen::Index>(r), c);
      lc.run(X);
      for (int p = 0; p < beta; ++p) {
        const cplx y = lc.at(np[static_cast<std::size_t>(p)]);
        md.gram(c, ia + p) = md.gram(ia + p, c) = 2.0 * y.real();
        md.gram(c, ib + p) = md.gram(ib + p, c) = 2.0 * y.imag();
      }
    }
  }

  Eigen::VectorXd pk(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index s = 0; s < S; ++s) {
    const int k = data[static_cast<std::size_t>(s)];
    double c0 = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double v = gs.envelope(k, rows[r]);
      pk(static_cast<Eigen::Index>(r)) = v;
      c0 += wr(static_cast<Eigen::Index>(r)) * v * v;
    }
    md.constant(s) = c0;
    if (nc) md.cross.col(s).head(nc) = WPc.transpose() * pk;
    if (beta) {
      std::fill(X.begin(), X.end(), cplx{});
      for (std::size_t r = 0; r < rows.size(); ++r) X[static_cast<std::size_t>(rows[r])] = wr(static_cast<Eigen::Index>(r)) * pk(static_cast<Eigen::Index>(r));
      lc.run(X);
      for (int p = 0; p < beta; ++p) {
        const cplx y = lc.at(np[static_cast<std::size_t>(p)]);
        md.cross(ia + p, s) = 2.0 * y.real();
        md.cross(ib + p, s) = 2.0 * y.imag();
      }
    }
  }
  const double tcc = nc ? md.gram.topLeftCorner(nc, nc).trace() : 0.0;
  out.trace_equivalent = tcc + 0.5 * (md.gram.trace() - tcc);
  return out;
}

void check_mask_grid(const PulseFamily& family, const SpectralMask& mask) {
  if (!mask.grid.is_uniform() || mask.grid.fft_size != family.config().fft_size) {
    throw GridMismatch("mask '" + mask.name + "' is not on a uniform grid of the system's N");
  }
}

template <class T>
detail::QuadraticOptions ridge_options(const Assembled<T>& a, const Layout& lay, const SolveOptions& opt,
                                       bool real_path) {
  const int n = lay.unknowns();
  double eps;
  if (opt.ridge) {
    if (*opt.ridge < 0.0) throw InvalidConfig("ridge must be non-negative");
    eps = *opt.ridge;
  } else {
    if (!(opt.ridge_scale >= 0.0)) throw InvalidConfig("ridge scale must be non-negative");
    eps = n ? opt.ridge_scale * a.trace_equivalent / n : 0.0;
    if (!(eps > 0.0)) eps = opt.ridge_scale > 0.0 ? opt.ridge_scale : 1e-12;
  }
  detail::QuadraticOptions q;
  q.ridge = Eigen::VectorXd::Constant(n, eps);
  if (real_path) q.ridge.tail(2 * lay.beta).setConstant(2.0 * eps);
  q.ridge_is_explicit_zero = opt.ridge && *opt.ridge == 0.0;
  return q;
}

ShaperSolution solve_layout(const PulseFamily& family, const CarrierSets& sets, int beta, const SpectralMask& mask0,
                            std::span<const SpectralMask> constraints, const PowerAllocation& power,
                            const SolveOptions& opt, ShaperKind kind) {
  const SystemConfig& cfg = family.config();
  CarrierSets checked = sets;
  checked.validate(cfg.fft_size);
  check_mask_grid(family, mask0);
  for (const auto& c : constraints) {
    check_mask_grid(family, c);
    if (!c.grid.same_as(mask0.grid)) throw GridMismatch("constraint '" + c.name + "' uses a different grid");
    if (!c.bound) throw InvalidConfig("constraint mask '" + c.name + "' has no bound");
  }
  if (sets.data.empty()) throw InvalidConfig("no data carriers");
  power.validate(sets.data);

  ShaperSolution sol;
  sol.kind = kind;
  sol.pulse_kind = family.kind();
  sol.fft_size = cfg.fft_size;
  sol.length = cfg.length();
  sol.beta = beta;
  sol.streams = sets.data;
  if (sol.has_aic()) sol.cancel = sets.cancel;

  Layout lay;
  lay.cancel = sol.has_aic() ? sets.cancel : std::vector<int>{};
  lay.beta = sol.has_transitions() ? beta : 0;
  lay.support = transition_support(cfg.length(), lay.beta);
  lay.time_offset = family.time_offset();
  if (family.kind() == PulseKind::Hermitian) lay.eta = cfg.center();

  const auto S = static_cast<Eigen::Index>(sets.data.size());
  if (lay.unknowns() == 0) {
    sol.aic = Eigen::MatrixXcd::Zero(lay.nc(), S);
    if (sol.has_transitions()) sol.transitions = Eigen::MatrixXcd::Zero(0, S);
    if (kind != ShaperKind::Aic || sets.cancel.empty()) sol.notes.push_back("nothing to optimize; returning the unshaped pulses");
    certify(sol, opt.realness_threshold);
    return sol;
  }

  std::vector<double> weight(static_cast<std::size_t>(S));
  for (Eigen::Index s = 0; s < S; ++s) {
    weight[static_cast<std::size_t>(s)] = power.of(sets.data[static_cast<std::size_t>(s)]) / cfg.symbol_period();
  }

  const GridSpectra gs(family, mask0.grid);
  const bool real_path = opt.exploit_realness && family.kind() == PulseKind::Hermitian;
  const std::vector<double> omega0 = mask_omega(mask0);

  auto run = [&](auto tag) {
    using T = decltype(tag);
    auto assemble = [&](const std::vector<double>& om) {
      if constexpr (std::is_same_v<T, double>) {
        return assemble_real(gs, lay, sets.data, om);
      } else {
        return assemble_complex(gs, lay, sets.data, om);
      }
    };
    const Assembled<T> obj = assemble(omega0);
    std::vector<detail::QuadraticConstraint<T>> cons;
    for (const auto& c : constraints) {
      cons.push_back({c.name, assemble(mask_omega(c)).model, *c.bound});
    }
    const auto q = ridge_options(obj, lay, opt, real_path);
    const auto res = detail::solve_quadratic<T>(obj.model, cons, weight, q);
    sol.diagnostics["ridge"] = q.ridge.size() ? q.ridge(0) : 0.0;
    sol.diagnostics["objective"] = detail::weighted_total<T>(res.objective, weight) * cfg.symbol_period();
    if (!res.active.empty()) {
      sol.diagnostics["multiplier"] = res.multiplier;
      sol.notes.push_back("constraint '" + res.active + "' is active");
    }
    const int nc = lay.nc();
    sol.aic = res.X.topRows(nc).template cast<cplx>();
    if (sol.has_transitions()) {
      if constexpr (std::is_same_v<T, double>) {
        sol.transitions = Eigen::MatrixXcd::Zero(2 * lay.beta, S);
        for (int p = 0; p < lay.beta; ++p) {
          for (Eigen::Index s = 0; s < S; ++s) {
            const double a = res.X(nc + p, s), b = res.X(nc + lay.beta + p, s);
            sol.transitions(lay.beta + p, s) = cplx(a, b);
            sol.transitions(lay.beta - 1 - p, s) = cplx(a, -b);
          }
        }
      } else {
        sol.transitions = res.X.bottomRows(2 * lay.beta);
      }
    }
    sol.real_unknowns = std::is_same_v<T, double> ? lay.unknowns() : 2 * lay.unknowns();
  };
  if (real_path) {
    run(double{});
  } else {
    run(cplx{});
  }
  if (!sol.has_aic()) sol.aic.resize(0, 0);
  certify(sol, opt.realness_threshold);
  return sol;
}

}  // namespace

ShaperSolution solve_aic(const PulseFamily& family, const CarrierSets& sets, const SpectralMask& mask0,
                         const SolveOptions& opt) {
  return solve_layout(family, sets, 0, mask0, {}, PowerAllocation{}, opt, ShaperKind::Aic);
}

ShaperSolution solve_ast(const PulseFamily& family, std::span<const int> data, const SpectralMask& mask0,
                         const SolveOptions& opt) {
  CarrierSets sets;
  sets.data.assign(data.begin(), data.end());
  ShaperSolution sol =
      solve_layout(family, sets, family.config().beta, mask0, {}, PowerAllocation{}, opt, ShaperKind::Ast);
  if (family.config().beta == 0) sol.notes.push_back("warning: beta = 0 leaves no transition samples");
  return sol;
}

ShaperSolution solve_aic_ast(const PulseFamily& family, const CarrierSets& sets, const SpectralMask& mask0,
                             std::span<const SpectralMask> constraints, const PowerAllocation& power,
                             const SolveOptions& opt) {
  return solve_layout(family, sets, family.config().beta, mask0, constraints, power, opt, ShaperKind::AicAst);
}

Eigen::MatrixXcd notch_matrix(const PulseFamily& family, std::span<const int> active, const NotchSet& notch) {
  Eigen::MatrixXcd A(static_cast<Eigen::Index>(notch.freqs.size()), static_cast<Eigen::Index>(active.size()));
  for (std::size_t m = 0; m < notch.freqs.size(); ++m) {
    for (std::size_t i = 0; i < active.size(); ++i) {
      A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)) = family.spectrum(active[i], notch.freqs[m]);
    }
  }
  return A;
}

namespace {

ShaperSolution precoder_shell(const PulseFamily& family, std::span<const int> active) {
  const SystemConfig& cfg = family.config();
  CarrierSets sets;
  sets.data.assign(active.begin(), active.end());
  sets.validate(cfg.fft_size);
  if (!std::is_sorted(active.begin(), active.end())) throw InvalidConfig("active carriers must be ascending");
  ShaperSolution sol;
  sol.kind = ShaperKind::Precoder;
  sol.pulse_kind = family.kind();
  sol.fft_size = cfg.fft_size;
  sol.length = cfg.length();
  sol.beta = cfg.beta;
  sol.active.assign(active.begin(), active.end());
  return sol;
}

template <class T>
Mat<T> projector_precoder(const Mat<T>& A, const Eigen::VectorXd& w, ShaperSolution& sol) {
  const Eigen::Index K = A.cols();
  Mat<T> G = Mat<T>::Identity(K, K);
  if (A.rows() == 0) return G;
  const Eigen::VectorXd isw = w.cwiseSqrt().cwiseInverse();
  const Mat<T> B = isw.asDiagonal() * A.adjoint();
  Eigen::ColPivHouseholderQR<Mat<T>> qr(B);
  const Eigen::Index r = qr.rank();
  if (r < A.rows()) {
    sol.notes.push_back("warning: notch matrix has rank " + std::to_string(r) + " < " + std::to_string(A.rows()) +
                        "; projecting with the pseudo-inverse");
  }
  const Mat<T> Q = qr.householderQ() * Mat<T>::Identity(K, r);
  const Mat<T> left = isw.asDiagonal() * Q;
  const Mat<T> right = Q.adjoint() * w.cwiseSqrt().asDiagonal();
  G.noalias() -= left * right;
  sol.diagnostics["rank"] = static_cast<double>(r);
  return G;
}

ShaperSolution ls_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                           const Eigen::VectorXd& w, const SolveOptions& opt) {
  notch.validate(active.size());
  ShaperSolution sol = precoder_shell(family, active);
  sol.streams = sol.active;
  const Eigen::MatrixXcd A = notch_matrix(family, active, notch);
  if (opt.exploit_realness && A.imag().cwiseAbs().maxCoeff() == 0.0) {
    sol.precoder = projector_precoder<double>(A.real(), w, sol).cast<cplx>();
    sol.real_unknowns = static_cast<int>(active.size());
  } else {
    sol.precoder = projector_precoder<cplx>(A, w, sol);
    sol.real_unknowns = 2 * static_cast<int>(active.size());
  }
  certify(sol, opt.realness_threshold);
  return sol;
}

int data_dimension(double rate, std::size_t active) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidConfig("coding rate must lie in (0, 1]");
  const double d = rate * static_cast<double>(active);
  const double r = std::round(d);
  if (std::abs(d - r) > 1e-9) {
    throw InvalidConfig("rate x |K| = " + std::to_string(d) + " is not an integer");
  }
  return static_cast<int>(r);
}

/// Descending singular values with a stable tie order; returns the indices of
/// the `count` smallest in that order.
std::vector<Eigen::Index> smallest_in_descending(const Eigen::VectorXd& sigma, int count) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(sigma.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return sigma(a) > sigma(b); });
  return {idx.end() - count, idx.end()};
}

template <class T>
void finish_orthogonal(const Mat<T>& V, const Eigen::VectorXd& sigma, int d, ShaperSolution& sol) {
  const auto sel = smallest_in_descending(sigma, d);
  Mat<T> G(V.rows(), d);
  double leak2 = 0.0;
  for (int j = 0; j < d; ++j) {
    G.col(j) = V.col(sel[static_cast<std::size_t>(j)]);
    leak2 += sigma(sel[static_cast<std::size_t>(j)]) * sigma(sel[static_cast<std::size_t>(j)]);
  }
  sol.precoder = G.template cast<cplx>();
  sol.diagnostics["leakage"] = std::sqrt(leak2);
  sol.diagnostics["sigma_kept_max"] = d ? sigma(sel.front()) : 0.0;
  const Eigen::Index drop = sigma.size() - d;
  if (drop > 0) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(sigma.size()));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::stable_sort(all.begin(), all.end(), [&](Eigen::Index a, Eigen::Index b) { return sigma(a) > sigma(b); });
    sol.diagnostics["sigma_dropped_min"] = sigma(all[static_cast<std::size_t>(drop - 1)]);
  }
}

/// Wide or explicit C: full SVD.
template <class T>
void orthogonal_from_matrix(const Mat<T>& C, int d, ShaperSolution& sol) {
  const Eigen::Index K = C.cols();
  Eigen::BDCSVD<Mat<T>> svd(C, Eigen::ComputeFullV);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(K);
  sigma.head(svd.singularValues().size()) = svd.singularValues();
  finish_orthogonal<T>(svd.matrixV(), sigma, d, sol);
}

/// Tall C given through its Gram matrix C^H C.
template <class T>
void orthogonal_from_gram(const Mat<T>& gram, int d, ShaperSolution& sol) {
  Eigen::SelfAdjointEigenSolver<Mat<T>> eig(gram);
  if (eig.info() != Eigen::Success) throw Error("eigen-decomposition of the leakage Gram matrix failed");
  const Eigen::VectorXd sigma = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  finish_orthogonal<T>(eig.eigenvectors(), sigma, d, sol);
}

}  // namespace

ShaperSolution solve_nullspace_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                                        const SolveOptions& opt) {
  return ls_precoder(family, active, notch, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(active.size())), opt);
}

ShaperSolution solve_weighted_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                                       const PrecoderSpec& spec, const SolveOptions& opt) {
  if (spec.weights.size() != active.size()) throw DimensionMismatch("one weight per active carrier is required");
  Eigen::VectorXd w(static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (!(spec.weights[i] > 0.0)) throw InvalidConfig("precoder weights must be positive");
    w(static_cast<Eigen::Index>(i)) = spec.weights[i];
  }
  return ls_precoder(family, active, notch, w, opt);
}

ShaperSolution solve_orthogonal_precoder(const PulseFamily& family, std::span<const int> active,
                                         const SpectralMask& mask, const PrecoderSpec& spec, const SolveOptions& opt) {
  check_mask_grid(family, mask);
  ShaperSolution sol = precoder_shell(family, active);
  const int d = data_dimension(spec.rate, active.size());
  sol.streams.assign(static_cast<std::size_t>(d), -1);
  const std::vector<double> omega = mask_omega(mask);
  std::vector<int> rows;
  for (std::size_t m = 0; m < omega.size(); ++m) {
    if (omega[m] != 0.0) rows.push_back(static_cast<int>(m));
  }
  const GridSpectra gs(family, mask.grid);
  const auto K = static_cast<Eigen::Index>(active.size());
  const bool real_path = opt.exploit_realness && family.kind() == PulseKind::Hermitian;

  auto run = [&](auto tag) {
    using T = decltype(tag);
    auto value = [&](int row, Eigen::Index i) -> T {
      const double s = std::sqrt(omega[static_cast<std::size_t>(row)]);
      if constexpr (std::is_same_v<T, double>) {
        return s * gs.envelope(active[static_cast<std::size_t>(i)], row);
      } else {
        return s * gs(active[static_cast<std::size_t>(i)], row);
      }
    };
    if (static_cast<Eigen::Index>(rows.size()) < K) {
      Mat<T> C(static_cast<Eigen::Index>(rows.size()), K);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (Eigen::Index i = 0; i < K; ++i) C(static_cast<Eigen::Index>(r), i) = value(rows[r], i);
      }
      orthogonal_from_matrix<T>(C, d, sol);
    } else {
      Mat<T> gram = Mat<T>::Zero(K, K);
      constexpr std::size_t block = 512;
      Mat<T> Cb;
      for (std::size_t r0 = 0; r0 < rows.size(); r0 += block) {
        const std::size_t nr = std::min(block, rows.size() - r0);
        Cb.resize(static_cast<Eigen::Index>(nr), K);
        for (std::size_t r = 0; r < nr; ++r) {
          for (Eigen::Index i = 0; i < K; ++i) Cb(static_cast<Eigen::Index>(r), i) = value(rows[r0 + r], i);
        }
        gram.template selfadjointView<Eigen::Lower>().rankUpdate(Cb.adjoint());
      }
      gram.template triangularView<Eigen::StrictlyUpper>() = gram.adjoint();
      orthogonal_from_gram<T>(gram, d, sol);
    }
    sol.real_unknowns = (std::is_same_v<T, double> ? 1 : 2) * static_cast<int>(K) * d;
  };
  if (real_path) {
    run(double{});
  } else {
    run(cplx{});
  }
  certify(sol, opt.realness_threshold);
  return sol;
}

ShaperSolution solve_orthogonal_precoder(const PulseFamily& family, std::span<const int> active, const NotchSet& notch,
                                         const PrecoderSpec& spec, const SolveOptions& opt) {
  notch.validate(active.size());
  ShaperSolution sol = precoder_shell(family, active);
  const int d = data_dimension(spec.rate, active.size());
  sol.streams.assign(static_cast<std::size_t>(d), -1);
  const Eigen::MatrixXcd A = notch_matrix(family, active, notch);
  const auto K = static_cast<int>(active.size());
  if (opt.exploit_realness && A.imag().cwiseAbs().maxCoeff() == 0.0) {
    orthogonal_from_matrix<double>(A.real(), d, sol);
    sol.real_unknowns = K * d;
  } else {
    orthogonal_from_matrix<cplx>(A, d, sol);
    sol.real_unknowns = 2 * K * d;
  }
  certify(sol, opt.realness_threshold);
  return sol;
}

ShaperSolution transform_solution(const ShaperSolution& sol, const SystemConfig& cfg) {
  if (sol.pulse_kind != PulseKind::Hermitian) throw PreconditionViolation("transform expects a Hermitian-pulse solution");
  if (sol.fft_size != cfg.fft_size || sol.length != cfg.length()) {
    throw DimensionMismatch("solution does not belong to this system configuration");
  }
  sol.check();
  const int N = cfg.fft_size;
  const std::int64_t shift = cfg.cyclic_shift();
  auto rot = [&](std::int64_t e) {
    const std::int64_t r = mod_floor(e * shift, N);
    if (r == 0) return cplx(1.0, 0.0);
    const double a = kTwoPi * static_cast<double>(r) / N;
    return cplx(std::cos(a), std::sin(a));
  };
  auto stream_carrier = [&](Eigen::Index s) -> std::int64_t {
    const int k = sol.streams[static_cast<std::size_t>(s)];
    return k < 0 ? 0 : k;
  };
  ShaperSolution out = sol;
  out.pulse_kind = PulseKind::Conventional;
  for (Eigen::Index s = 0; s < sol.stream_count(); ++s) {
    const std::int64_t k = stream_carrier(s);
    for (Eigen::Index r = 0; r < sol.precoder.rows(); ++r) {
      out.precoder(r, s) = sol.precoder(r, s) * rot(k - sol.active[static_cast<std::size_t>(r)]);
    }
    for (Eigen::Index r = 0; r < sol.aic.rows(); ++r) {
      out.aic(r, s) = sol.aic(r, s) * rot(k - sol.cancel[static_cast<std::size_t>(r)]);
    }
    if (sol.transitions.size()) out.transitions.col(s) = sol.transitions.col(s) * rot(k);
  }
  out.realness = measure_realness(out);
  out.realness.real = out.realness.value() <= kRealnessThreshold;
  out.notes.push_back("transformed from the Hermitian-pulse solution");
  return out;
}

}  // namespace ofdmshape
