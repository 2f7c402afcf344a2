#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"

namespace fundusq::ml {

/// Samples by named feature columns. Label 1 = sharp/good, 0 = blurry/bad.
struct FeatureMatrix {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  std::vector<int> labels;
  std::vector<std::string> ids;
  std::vector<std::string> subjects;

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
  [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(x.cols()); }

  void validate() const {
    if (names.size() != cols()) throw InvalidArgument("FeatureMatrix: column name count mismatch");
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
      throw InvalidArgument("FeatureMatrix: duplicate column names");
    if (labels.size() != rows()) throw InvalidArgument("FeatureMatrix: label count mismatch");
    if (!ids.empty() && ids.size() != rows()) throw InvalidArgument("FeatureMatrix: id count mismatch");
    if (!subjects.empty() && subjects.size() != rows())
      throw InvalidArgument("FeatureMatrix: subject count mismatch");
    for (int l : labels)
      if (l != 0 && l != 1) throw InvalidArgument("FeatureMatrix: labels must be 0 or 1");
    if (!x.allFinite()) throw InvalidArgument("FeatureMatrix: missing or non-finite values");
  }

  [[nodiscard]] FeatureMatrix subset(const std::vector<std::size_t>& rows_wanted) const {
    FeatureMatrix out;
    out.names = names;
    out.x.resize(static_cast<Eigen::Index>(rows_wanted.size()), x.cols());
    for (std::size_t i = 0; i < rows_wanted.size(); ++i) {
      const auto r = rows_wanted[i];
      out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(r));
      out.labels.push_back(labels[r]);
      if (!ids.empty()) out.ids.push_back(ids[r]);
      if (!subjects.empty()) out.subjects.push_back(subjects[r]);
    }
    return out;
  }

  /// Keeps the named columns, in the order given.
  [[nodiscard]] FeatureMatrix select(const std::vector<std::string>& wanted) const {
    FeatureMatrix out = *this;
    out.names = wanted;
    out.x.resize(x.rows(), static_cast<Eigen::Index>(wanted.size()));
    for (std::size_t j = 0; j < wanted.size(); ++j)
      out.x.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(column(wanted[j])));
    return out;
  }

  [[nodiscard]] FeatureMatrix without(const std::vector<std::string>& dropped) const {
    std::vector<std::string> keep;
    for (const auto& n : names)
      if (std::find(dropped.begin(), dropped.end(), n) == dropped.end()) keep.push_back(n);
    return select(keep);
  }

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j] == name) return j;
    throw InvalidArgument("FeatureMatrix: no column named " + name);
  }
};

inline Eigen::VectorXd label_vector(const std::vector<int>& labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];
  return y;
}

inline void require_both_classes(const std::vector<int>& labels, const char* what) {
  std::size_t pos = 0;
  for (int l : labels) pos += l == 1;
  if (pos == 0 || pos == labels.size())
    throw InvalidArgument(std::string(what) + ": need both classes, got a single-class set");
}

}  // namespace fundusq::ml
