#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"
#include "fundusq/ml/dataset.hpp"

namespace fundusq::ml {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  double positive_fraction = 0.0;  // leaves only
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// 1 if the leaf reached holds a strict majority of positives.
  [[nodiscard]] int vote(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(i)];
      i = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].positive_fraction > 0.5 ? 1 : 0;
  }
};

struct RandomForest {
  std::vector<DecisionTree> trees;

  /// Fraction of trees voting for the positive class.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      int votes = 0;
      for (const auto& t : trees) votes += t.vote(x.row(r));
      out(r) = static_cast<double>(votes) / static_cast<double>(trees.size());
    }
    return out;
  }
};

struct ForestOptions {
  std::size_t trees = 100;
  std::uint64_t seed = 0;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<int>& y, std::mt19937_64& rng)
      : x_(x), y_(y), rng_(rng),
        mtry_(std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::floor(std::sqrt(static_cast<double>(x.cols())))))) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree t;
    grow(t, rows);
    return t;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
  };

  int grow(DecisionTree& t, std::vector<std::size_t>& rows) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += y_[r] == 1;
    const double frac = static_cast<double>(pos) / static_cast<double>(rows.size());
    t.nodes[static_cast<std::size_t>(id)].positive_fraction = frac;
    if (pos == 0 || pos == rows.size()) return id;

    const Split s = best_split(rows, pos);
    if (s.feature < 0) return id;  // no feature separates these rows
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (x_(static_cast<Eigen::Index>(r), s.feature) <= s.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(t, left);
    const int rr = grow(t, right);
    TreeNode& node = t.nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  /// Examines features in random order; stops after mtry features once a
  /// valid split has been seen, otherwise keeps drawing.
  Split best_split(const std::vector<std::size_t>& rows, std::size_t pos) {
    std::vector<int> features(static_cast<std::size_t>(x_.cols()));
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng_);

    const auto n = static_cast<double>(rows.size());
    Split best;
    best.impurity = 1e300;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
      if (k >= mtry_ && best.feature >= 0) break;
      const int f = features[k];
      for (std::size_t i = 0; i < rows.size(); ++i)
        vals[i] = {x_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
      std::sort(vals.begin(), vals.end());
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left_pos += vals[i].second == 1;
        if (vals[i].first == vals[i + 1].first) continue;
        const auto nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double pl = static_cast<double>(left_pos) / nl;
        const double pr = static_cast<double>(pos - left_pos) / nr;
        const double g = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
        if (g < best.impurity) {
          best = {f, 0.5 * (vals[i].first + vals[i + 1].first), g};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const std::vector<int>& y_;
  std::mt19937_64& rng_;
  std::size_t mtry_;
};

}  // namespace detail

/// Bagged CART trees (Gini, floor(sqrt(p)) candidate features per split,
/// grown to purity). Each tree draws its own seed from one master stream.
inline RandomForest train_random_forest(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                        const ForestOptions& opt = {}) {
  require_both_classes(labels, "train_random_forest");
  if (opt.trees == 0) throw InvalidArgument("train_random_forest: need at least one tree");
  const std::size_t n = labels.size();
  std::mt19937_64 master(opt.seed);
  RandomForest forest;
  for (std::size_t t = 0; t < opt.trees; ++t) {
    std::mt19937_64 rng(master());
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    detail::TreeBuilder builder(x, labels, rng);
    forest.trees.push_back(builder.build(std::move(rows)));
  }
  return forest;
}

}  // namespace fundusq::ml
