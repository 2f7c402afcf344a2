#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"
#include "fundusq/ml/dataset.hpp"

namespace fundusq::ml {

struct SvmDualSolution {
  Eigen::VectorXd alpha;
  double rho = 0.0;        // decision(x) = sum_i alpha_i y_i K(x_i, x) - rho
  double objective = 0.0;  // 0.5 a'Qa - sum(a), Q_ij = y_i y_j K_ij
  std::size_t iterations = 0;
};

struct SvmOptions {
  double c = 1.0;
  double tolerance = 1e-3;  // KKT violation bound
  /// Iteration cap is passes_per_sample * n; exceeding it is an error.
  std::size_t passes_per_sample = 10000;
};

/// SMO with second-order working-set selection. Non-positive curvature along
/// the chosen pair is replaced by a small constant, so indefinite kernels
/// (sigmoid) still make progress. `y` holds +-1.
inline SvmDualSolution solve_svm_dual(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                      const SvmOptions& opt = {}) {
  constexpr double kTau = 1e-12;
  const Eigen::Index n = y.size();
  const double c = opt.c;
  if (!(c > 0.0)) throw InvalidArgument("svm: C must be positive");
  if (k.rows() != n || k.cols() != n) throw InvalidArgument("svm: kernel shape mismatch");

  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Constant(n, -1.0);
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * k(i, j); };
  auto in_up = [&](Eigen::Index t) { return (y(t) > 0 && a(t) < c) || (y(t) < 0 && a(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (y(t) > 0 && a(t) > 0) || (y(t) < 0 && a(t) < c); };

  const std::size_t max_iter = opt.passes_per_sample * static_cast<std::size_t>(n);
  SvmDualSolution sol;
  for (;; ++sol.iterations) {
    if (sol.iterations >= max_iter)
      throw ConvergenceError("svm: SMO did not reach the KKT tolerance within " +
                             std::to_string(max_iter) + " iterations");
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -y(t) * g(t) >= gmax) {
        gmax = -y(t) * g(t);
        i = t;
      }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      gmax2 = std::max(gmax2, y(t) * g(t));
      const double b = gmax + y(t) * g(t);
      if (i >= 0 && b > 0.0) {
        double curv = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (curv <= 0.0) curv = kTau;
        if (-(b * b) / curv <= best) {
          best = -(b * b) / curv;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < opt.tolerance) break;

    const double ai = a(i), aj = a(j);
    double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y(i) != y(j)) {
      const double delta = (-g(i) - g(j)) / quad;
      const double diff = a(i) - a(j);
      a(i) += delta;
      a(j) += delta;
      if (diff > 0) {
        if (a(j) < 0) { a(j) = 0; a(i) = diff; }
      } else {
        if (a(i) < 0) { a(i) = 0; a(j) = -diff; }
      }
      if (diff > 0) {
        if (a(i) > c) { a(i) = c; a(j) = c - diff; }
      } else {
        if (a(j) > c) { a(j) = c; a(i) = c + diff; }
      }
    } else {
      const double delta = (g(i) - g(j)) / quad;
      const double sum = a(i) + a(j);
      a(i) -= delta;
      a(j) += delta;
      if (sum > c) {
        if (a(i) > c) { a(i) = c; a(j) = sum - c; }
      } else {
        if (a(j) < 0) { a(j) = 0; a(i) = sum; }
      }
      if (sum > c) {
        if (a(j) > c) { a(j) = c; a(i) = sum - c; }
      } else {
        if (a(i) < 0) { a(i) = 0; a(j) = sum; }
      }
    }
    const double di = a(i) - ai, dj = a(j) - aj;
    for (Eigen::Index t = 0; t < n; ++t) g(t) += q(t, i) * di + q(t, j) * dj;
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * g(t);
    if (a(t) >= c) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a(t) <= 0) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  sol.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  sol.objective = 0.5 * a.dot(g - Eigen::VectorXd::Ones(n));
  sol.alpha = std::move(a);
  return sol;
}

/// tanh(gamma <u, v>) with zero offset.
inline Eigen::MatrixXd sigmoid_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                      double gamma) {
  return (gamma * (a * b.transpose())).array().tanh().matrix();
}

struct SvmModel {
  Eigen::MatrixXd support;  // support vectors, one per row
  Eigen::VectorXd coef;     // alpha_i * y_i
  double rho = 0.0;
  double gamma = 1.0;

  [[nodiscard]] Eigen::VectorXd decision(const Eigen::MatrixXd& xs) const {
    return (sigmoid_kernel(xs, support, gamma) * coef).array() - rho;
  }

  /// Logistic squashing of the margin.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& xs) const {
    return decision(xs).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
};

/// gamma = 1 / (features * variance of all entries of the scaled matrix).
inline double default_gamma(const Eigen::MatrixXd& xs) {
  const double mean = xs.mean();
  const double var = (xs.array() - mean).square().mean();
  if (!(var > 0.0)) throw DomainError("svm: scaled features have zero variance");
  return 1.0 / (static_cast<double>(xs.cols()) * var);
}

inline SvmModel train_svm_sigmoid(const Eigen::MatrixXd& xs, const std::vector<int>& labels,
                                  const SvmOptions& opt = {}) {
  require_both_classes(labels, "train_svm_sigmoid");
  const double gamma = default_gamma(xs);
  Eigen::VectorXd y(xs.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  const SvmDualSolution sol = solve_svm_dual(sigmoid_kernel(xs, xs, gamma), y, opt);

  SvmModel m;
  m.gamma = gamma;
  m.rho = sol.rho;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (sol.alpha(i) > 0.0) sv.push_back(i);
  m.support.resize(static_cast<Eigen::Index>(sv.size()), xs.cols());
  m.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    m.support.row(static_cast<Eigen::Index>(s)) = xs.row(sv[s]);
    m.coef(static_cast<Eigen::Index>(s)) = sol.alpha(sv[s]) * y(sv[s]);
  }
  return m;
}

}  // namespace fundusq::ml
