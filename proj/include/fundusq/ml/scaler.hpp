#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"

namespace fundusq::ml {

/// Per-column z-score with population standard deviation.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean.size()) throw InvalidArgument("Scaler: column count mismatch");
    return (x.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
  }
};

inline Scaler fit_scaler(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw InvalidArgument("fit_scaler: empty matrix");
  Scaler s;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - s.mean.transpose();
  s.sd = (centred.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt().transpose();
  for (Eigen::Index j = 0; j < s.sd.size(); ++j) {
    // Relative test so columns that are constant up to rounding are caught.
    if (!(s.sd(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j)))))
      throw DomainError("fit_scaler: column " + std::to_string(j) + " is constant");
  }
  return s;
}

}  // namespace fundusq::ml
