#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"
#include "fundusq/ml/dataset.hpp"
#include "fundusq/ml/evaluate.hpp"
#include "fundusq/ml/split.hpp"

namespace fundusq::ml {

struct LogisticModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double c = 1.0;  // inverse regularisation strength used for the fit

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& xs) const {
    const Eigen::VectorXd z = (xs * w).array() + b;
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
};

struct LogisticOptions {
  double tolerance = 1e-6;  // on the gradient norm
  int max_iterations = 10000;
};

struct LogisticCvOptions {
  std::size_t folds = 5;
  std::vector<double> c_grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::uint64_t seed = 0;
  LogisticOptions fit{};
};

struct LogisticCvResult {
  LogisticModel model;
  std::vector<double> mean_f1;  // per c_grid entry
};

namespace detail {

inline double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace detail

/// Objective (1/n) sum_i [log(1 + e^{z_i}) - y_i z_i] + ||w||^2 / (2 C n),
/// z = X w + b; the intercept is not penalised. Returns the objective and
/// fills the gradient (w part, then b as the last entry).
inline double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, double b, double c,
                                 Eigen::VectorXd* grad = nullptr) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::VectorXd z = (x * w).array() + b;
  double loss = 0.0;
  Eigen::VectorXd resid(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += detail::log1p_exp(z(i)) - y(i) * z(i);
    resid(i) = 1.0 / (1.0 + std::exp(-z(i))) - y(i);
  }
  const double reg = 1.0 / (c * n);
  if (grad != nullptr) {
    grad->resize(w.size() + 1);
    grad->head(w.size()) = x.transpose() * resid / n + reg * w;
    (*grad)(w.size()) = resid.sum() / n;
  }
  return loss / n + 0.5 * reg * w.squaredNorm();
}

/// Gradient descent with step 1/L, L the Lipschitz bound of the gradient.
inline LogisticModel fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                  double c, const LogisticOptions& opt = {}) {
  require_both_classes(labels, "fit_logistic");
  if (!(c > 0.0)) throw InvalidArgument("fit_logistic: C must be positive");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd y = label_vector(labels);

  Eigen::MatrixXd aug(n, p + 1);
  aug << x, Eigen::VectorXd::Ones(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(aug.transpose() * aug,
                                                           Eigen::EigenvaluesOnly);
  const double lipschitz =
      eig.eigenvalues().maxCoeff() / (4.0 * static_cast<double>(n)) + 1.0 / (c * static_cast<double>(n));
  const double step = 1.0 / lipschitz;

  LogisticModel m{Eigen::VectorXd::Zero(p), 0.0, c};
  Eigen::VectorXd g;
  for (int it = 0; it < opt.max_iterations; ++it) {
    logistic_objective(x, y, m.w, m.b, c, &g);
    if (g.norm() < opt.tolerance) break;
    m.w -= step * g.head(p);
    m.b -= step * g(p);
  }
  return m;
}

/// Chooses C from the grid by mean F1 over stratified folds (ties go to the
/// smaller C), then refits on all rows.
inline LogisticCvResult train_logreg_cv(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                        const LogisticCvOptions& opt = {}) {
  require_both_classes(labels, "train_logreg_cv");
  const std::size_t n = labels.size();
  if (opt.folds < 2) throw InvalidArgument("train_logreg_cv: need at least 2 folds");
  if (n < opt.folds) throw InvalidArgument("train_logreg_cv: fewer rows than folds");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos < opt.folds || n - pos < opt.folds)
    throw InvalidArgument("train_logreg_cv: each class needs at least one row per fold");
  if (opt.c_grid.empty()) throw InvalidArgument("train_logreg_cv: empty C grid");

  const std::vector<std::size_t> fold = stratified_folds(labels, opt.folds, opt.seed);
  LogisticCvResult result;
  for (double c : opt.c_grid) {
    double total = 0.0;
    for (std::size_t f = 0; f < opt.folds; ++f) {
      std::vector<std::size_t> tr, te;
      for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? te : tr).push_back(i);
      Eigen::MatrixXd xtr(static_cast<Eigen::Index>(tr.size()), x.cols());
      Eigen::MatrixXd xte(static_cast<Eigen::Index>(te.size()), x.cols());
      std::vector<int> ytr, yte;
      for (std::size_t i = 0; i < tr.size(); ++i) {
        xtr.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(tr[i]));
        ytr.push_back(labels[tr[i]]);
      }
      for (std::size_t i = 0; i < te.size(); ++i) {
        xte.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(te[i]));
        yte.push_back(labels[te[i]]);
      }
      const Eigen::VectorXd s = fit_logistic(xtr, ytr, c, opt.fit).predict(xte);
      total += f1_score(confusion_at(std::vector<double>(s.data(), s.data() + s.size()), yte));
    }
    result.mean_f1.push_back(total / static_cast<double>(opt.folds));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.mean_f1.size(); ++i)
    if (result.mean_f1[i] > result.mean_f1[best]) best = i;
  result.model = fit_logistic(x, labels, opt.c_grid[best], opt.fit);
  return result;
}

}  // namespace fundusq::ml
