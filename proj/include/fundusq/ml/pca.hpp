#pragma once

#include <algorithm>
#include <string>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"

namespace fundusq::ml {

struct PcaModel {
  Eigen::MatrixXd components;  // k x features, orthonormal rows
  Eigen::VectorXd explained;   // fraction of total variance per component

  [[nodiscard]] Eigen::MatrixXd project(const Eigen::MatrixXd& xs) const {
    if (xs.cols() != components.cols()) throw InvalidArgument("PcaModel: column count mismatch");
    return xs * components.transpose();
  }
};

/// Top-k eigenvectors of the sample covariance of standard-scaled data. Each
/// component's sign is fixed so its largest-magnitude loading is positive.
inline PcaModel fit_pca(const Eigen::MatrixXd& xs, Eigen::Index k = 2) {
  const Eigen::Index n = xs.rows();
  const Eigen::Index p = xs.cols();
  if (k < 1 || k > std::min(n - 1, p))
    throw InvalidArgument("fit_pca: k = " + std::to_string(k) + " exceeds min(rows - 1, cols)");
  const Eigen::MatrixXd centred = xs.rowwise() - xs.colwise().mean();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DomainError("fit_pca: eigendecomposition failed");

  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);  // ascending
  const double total = values.sum();
  if (!(total > 0.0)) throw DomainError("fit_pca: data has zero variance");
  PcaModel m;
  m.components.resize(k, p);
  m.explained.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = p - 1 - i;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    m.components.row(i) = v.transpose();
    m.explained(i) = values(src) / total;
  }
  return m;
}

}  // namespace fundusq::ml
