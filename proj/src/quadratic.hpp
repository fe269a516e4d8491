#pragma once

// Shared-Gram quadratic least squares with at most one active quadratic
// inequality, solved by bisection on the Lagrange multiplier.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ofdmshape/errors.hpp"

namespace ofdmshape::detail {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// J_s(x) = x^H gram x + 2 Re(x^H cross_s) + constant_s for each stream s.
template <class T>
struct QuadraticModel {
  Mat<T> gram;
  Mat<T> cross;
  Eigen::VectorXd constant;

  Eigen::VectorXd evaluate(const Mat<T>& X) const {
    const Mat<T> GX = gram * X;
    Eigen::VectorXd J(X.cols());
    for (Eigen::Index s = 0; s < X.cols(); ++s) {
      J(s) = std::real(X.col(s).dot(GX.col(s))) + 2.0 * std::real(X.col(s).dot(cross.col(s))) + constant(s);
    }
    return J;
  }
};

template <class T>
struct QuadraticConstraint {
  std::string name;
  QuadraticModel<T> model;
  double bound = 0.0;  ///< on sum_s weight_s J_s
};

template <class T>
struct QuadraticSolution {
  Mat<T> X;
  Eigen::VectorXd objective;  ///< per stream, without the ridge term
  std::string active;         ///< name of the active constraint, empty if none
  double multiplier = 0.0;
};

struct QuadraticOptions {
  Eigen::VectorXd ridge;         ///< per-unknown diagonal loading
  bool ridge_is_explicit_zero = false;
  double slack_tolerance = 1e-10;  ///< relative to the bound
};

template <class T>
Eigen::LLT<Mat<T>> factor(const Mat<T>& gram, const QuadraticOptions& opt) {
  Mat<T> A = gram;
  A.diagonal() += opt.ridge.template cast<T>();
  Eigen::LLT<Mat<T>> llt(A);
  if (llt.info() != Eigen::Success) {
    throw IllConditioned("normal equations are not positive definite; increase the ridge above " +
                         std::to_string(opt.ridge.size() ? opt.ridge.maxCoeff() : 0.0));
  }
  if (opt.ridge_is_explicit_zero && A.rows() > 0) {
    const double rc = llt.rcond();
    if (!(rc > 1e3 * std::numeric_limits<double>::epsilon())) {
      throw IllConditioned("Gram matrix is singular (reciprocal condition " + std::to_string(rc) +
                           ") and ridge = 0; use a ridge > 0");
    }
  }
  return llt;
}

template <class T>
double weighted_total(const Eigen::VectorXd& J, std::span<const double> weight) {
  double acc = 0.0;
  for (Eigen::Index s = 0; s < J.size(); ++s) acc += weight[static_cast<std::size_t>(s)] * J(s);
  return acc;
}

/// Minimizes sum_s weight_s J0_s subject to sum_s weight_s J_j,s <= bound_j.
template <class T>
QuadraticSolution<T> solve_quadratic(const QuadraticModel<T>& obj, std::span<const QuadraticConstraint<T>> constraints,
                                     std::span<const double> weight, const QuadraticOptions& opt) {
  const Eigen::LLT<Mat<T>> llt = factor<T>(obj.gram, opt);
  QuadraticSolution<T> out;
  out.X = -llt.solve(obj.cross);

  std::vector<std::size_t> violated;
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const double v = weighted_total<T>(constraints[j].model.evaluate(out.X), weight);
    if (v > constraints[j].bound) violated.push_back(j);
  }
  if (violated.size() > 1) {
    throw Error("constraints '" + constraints[violated[0]].name + "' and '" + constraints[violated[1]].name +
                "' are both active; only one active power constraint is supported");
  }
  if (violated.size() == 1) {
    const auto& con = constraints[violated.front()];
    const auto& c1 = con.model;
    const Mat<T> Lm = llt.matrixL();
    const auto L = Lm.template triangularView<Eigen::Lower>();
    // Pencil (gram + ridge, c1.gram) diagonalized as L U (I + mu Lambda) U^H L^H.
    const Mat<T> B = L.solve(c1.gram);
    Mat<T> M = L.solve(B.adjoint()).adjoint();
    M = (0.5 * (M + M.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat<T>> eig(M);
    if (eig.info() != Eigen::Success) throw Error("eigen-decomposition of the constraint pencil failed");
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    const Mat<T>& U = eig.eigenvectors();
    const Mat<T> y0 = U.adjoint() * L.solve(obj.cross);
    const Mat<T> y1 = U.adjoint() * L.solve(c1.cross);
    const double lam_floor = lam.size() ? 1e-14 * lam.maxCoeff() : 0.0;

    auto constraint_at = [&](double mu, Mat<T>* z_out) {
      double total = 0.0;
      Mat<T> z(y0.rows(), y0.cols());
      for (Eigen::Index s = 0; s < y0.cols(); ++s) {
        double J = c1.constant(s);
        for (Eigen::Index i = 0; i < y0.rows(); ++i) {
          const T zi = (y0(i, s) + mu * y1(i, s)) / (1.0 + mu * lam(i));
          z(i, s) = zi;
          J += lam(i) * std::norm(zi) - 2.0 * std::real(std::conj(zi) * y1(i, s));
        }
        total += weight[static_cast<std::size_t>(s)] * J;
      }
      if (z_out) *z_out = std::move(z);
      return total;
    };

    double floor_value = 0.0;
    for (Eigen::Index s = 0; s < y1.cols(); ++s) {
      double J = c1.constant(s);
      for (Eigen::Index i = 0; i < y1.rows(); ++i) {
        if (lam(i) > lam_floor) J -= std::norm(y1(i, s)) / lam(i);
      }
      floor_value += weight[static_cast<std::size_t>(s)] * J;
    }
    const double bound = con.bound;
    if (bound < floor_value) throw Infeasible(con.name, bound, floor_value);

    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (constraint_at(hi, nullptr) > bound) {
      lo = hi;
      hi *= 4.0;
      if (++guard > 600) throw Infeasible(con.name, bound, floor_value);
    }
    const double tol = opt.slack_tolerance * std::max(std::abs(bound), std::numeric_limits<double>::min());
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      const double v = constraint_at(mid, nullptr);
      if (v > bound) {
        lo = mid;
      } else {
        hi = mid;
        if (bound - v <= tol) break;
      }
    }
    Mat<T> z;
    constraint_at(hi, &z);
    const Mat<T> Uz = U * z;
    out.X = -L.adjoint().solve(Uz);
    out.active = con.name;
    out.multiplier = hi;
    for (std::size_t j = 0; j < constraints.size(); ++j) {
      if (j == violated.front()) continue;
      const double v = weighted_total<T>(constraints[j].model.evaluate(out.X), weight);
      if (v > constraints[j].bound) {
        throw Error("enforcing '" + con.name + "' activates '" + constraints[j].name +
                    "'; only one active power constraint is supported");
      }
    }
  }
  out.objective = obj.evaluate(out.X);
  return out;
}

}  // namespace ofdmshape::detail
