#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fundusq/errors.hpp"
#include "fundusq/ml/dataset.hpp"
#include "fundusq/ml/forest.hpp"
#include "fundusq/ml/logistic.hpp"
#include "fundusq/ml/scaler.hpp"
#include "fundusq/ml/svm.hpp"

namespace fundusq::ml {

enum class ModelKind { kLogregCv, kRandomForest, kSvmSigmoid };

inline std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kLogregCv: return "logreg_cv";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kSvmSigmoid: return "svm_sigmoid";
  }
  return "";
}

inline ModelKind kind_from_name(std::string_view s) {
  for (auto k : {ModelKind::kLogregCv, ModelKind::kRandomForest, ModelKind::kSvmSigmoid})
    if (kind_name(k) == s) return k;
  throw InvalidArgument("unknown model kind: " + std::string(s));
}

struct TrainOptions {
  LogisticCvOptions logreg{};
  ForestOptions forest{};
  SvmOptions svm{};
};

/// A classifier together with the scaler and feature schema it was fit on.
struct TrainedModel {
  ModelKind kind = ModelKind::kLogregCv;
  std::string schema;
  std::vector<std::string> feature_names;
  Scaler scaler;
  std::variant<LogisticModel, RandomForest, SvmModel> params;
  std::vector<double> cv_mean_f1;  // logreg_cv only; not persisted

  /// Scores in [0,1]; columns must follow feature_names.
  [[nodiscard]] std::vector<double> predict(const Eigen::MatrixXd& x) const {
    const Eigen::MatrixXd xs = scaler.apply(x);
    const Eigen::VectorXd s =
        std::visit([&](const auto& m) -> Eigen::VectorXd { return m.predict(xs); }, params);
    return {s.data(), s.data() + s.size()};
  }

  [[nodiscard]] std::vector<double> predict(const FeatureMatrix& data) const {
    if (data.names != feature_names)
      throw SchemaError("model features do not match the supplied columns");
    return predict(data.x);
  }
};

inline TrainedModel train_model(ModelKind kind, const FeatureMatrix& data, std::string schema,
                                const TrainOptions& opt = {}) {
  data.validate();
  require_both_classes(data.labels, "train");
  TrainedModel m;
  m.kind = kind;
  m.schema = std::move(schema);
  m.feature_names = data.names;
  m.scaler = fit_scaler(data.x);
  const Eigen::MatrixXd xs = m.scaler.apply(data.x);
  switch (kind) {
    case ModelKind::kLogregCv: {
      LogisticCvResult r = train_logreg_cv(xs, data.labels, opt.logreg);
      m.params = std::move(r.model);
      m.cv_mean_f1 = std::move(r.mean_f1);
      break;
    }
    case ModelKind::kRandomForest:
      m.params = train_random_forest(xs, data.labels, opt.forest);
      break;
    case ModelKind::kSvmSigmoid:
      m.params = train_svm_sigmoid(xs, data.labels, opt.svm);
      break;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Flat text persistence. Doubles are written with %.17g so a save/load cycle
// is exact and equal models give equal bytes.

inline constexpr std::string_view kModelMagic = "fundusq-model 1";

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_vector(std::ostream& os, std::string_view key, const Eigen::VectorXd& v) {
  os << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << fmt(v(i));
  os << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::istringstream line(std::string_view key) {
    std::string text;
    if (!std::getline(is_, text)) throw SchemaError("model file truncated before '" + std::string(key) + "'");
    std::istringstream ss(text);
    std::string got;
    ss >> got;
    if (got != key) throw SchemaError("model file: expected '" + std::string(key) + "', found '" + got + "'");
    return ss;
  }

  std::string raw_line() {
    std::string text;
    if (!std::getline(is_, text)) throw SchemaError("model file truncated");
    return text;
  }

  template <typename T>
  static T take(std::istringstream& ss, std::string_view what) {
    std::string tok;
    if (!(ss >> tok)) throw SchemaError("model file: missing " + std::string(what));
    try {
      if constexpr (std::is_same_v<T, double>) {
        return std::stod(tok);
      } else {
        return static_cast<T>(std::stoll(tok));
      }
    } catch (const std::exception&) {
      throw SchemaError("model file: bad " + std::string(what) + " '" + tok + "'");
    }
  }

  Eigen::VectorXd vector(std::string_view key) {
    auto ss = line(key);
    const auto n = take<Eigen::Index>(ss, key);
    if (n < 0) throw SchemaError("model file: negative length");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = take<double>(ss, key);
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace detail

inline void write_model(std::ostream& os, const TrainedModel& m) {
  using detail::fmt;
  os << kModelMagic << '\n';
  os << "kind " << kind_name(m.kind) << '\n';
  os << "schema " << m.schema << '\n';
  os << "features " << m.feature_names.size() << '\n';
  for (const auto& n : m.feature_names) os << n << '\n';
  detail::write_vector(os, "scaler_mean", m.scaler.mean);
  detail::write_vector(os, "scaler_sd", m.scaler.sd);
  if (const auto* lr = std::get_if<LogisticModel>(&m.params)) {
    os << "c " << fmt(lr->c) << '\n';
    detail::write_vector(os, "weights", lr->w);
    os << "intercept " << fmt(lr->b) << '\n';
  } else if (const auto* rf = std::get_if<RandomForest>(&m.params)) {
    os << "trees " << rf->trees.size() << '\n';
    for (const auto& t : rf->trees) {
      os << "tree " << t.nodes.size() << '\n';
      for (const auto& n : t.nodes)
        os << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
           << fmt(n.positive_fraction) << '\n';
    }
  } else {
    const auto& sv = std::get<SvmModel>(m.params);
    os << "gamma " << fmt(sv.gamma) << '\n';
    os << "rho " << fmt(sv.rho) << '\n';
    os << "support " << sv.support.rows() << '\n';
    for (Eigen::Index i = 0; i < sv.support.rows(); ++i) {
      os << fmt(sv.coef(i));
      for (Eigen::Index j = 0; j < sv.support.cols(); ++j) os << ' ' << fmt(sv.support(i, j));
      os << '\n';
    }
  }
  os << "end\n";
}

inline TrainedModel read_model(std::istream& is) {
  detail::Reader rd(is);
  if (rd.raw_line() != kModelMagic) throw SchemaError("not a fundusq model file (bad header)");
  TrainedModel m;
  {
    auto ss = rd.line("kind");
    std::string k;
    ss >> k;
    try {
      m.kind = kind_from_name(k);
    } catch (const InvalidArgument& e) {
      throw SchemaError(e.what());
    }
  }
  {
    auto ss = rd.line("schema");
    ss >> m.schema;
  }
  {
    auto ss = rd.line("features");
    const auto n = detail::Reader::take<std::size_t>(ss, "feature count");
    for (std::size_t i = 0; i < n; ++i) m.feature_names.push_back(rd.raw_line());
  }
  m.scaler.mean = rd.vector("scaler_mean");
  m.scaler.sd = rd.vector("scaler_sd");
  const auto p = static_cast<Eigen::Index>(m.feature_names.size());
  if (m.scaler.mean.size() != p || m.scaler.sd.size() != p)
    throw SchemaError("model file: scaler length does not match feature count");

  using detail::Reader;
  switch (m.kind) {
    case ModelKind::kLogregCv: {
      LogisticModel lr;
      auto cs = rd.line("c");
      lr.c = Reader::take<double>(cs, "c");
      lr.w = rd.vector("weights");
      auto bs = rd.line("intercept");
      lr.b = Reader::take<double>(bs, "intercept");
      if (lr.w.size() != p) throw SchemaError("model file: weight count mismatch");
      m.params = std::move(lr);
      break;
    }
    case ModelKind::kRandomForest: {
      RandomForest rf;
      auto ts = rd.line("trees");
      const auto nt = Reader::take<std::size_t>(ts, "tree count");
      for (std::size_t t = 0; t < nt; ++t) {
        auto hs = rd.line("tree");
        const auto nn = Reader::take<std::size_t>(hs, "node count");
        DecisionTree tree;
        for (std::size_t i = 0; i < nn; ++i) {
          std::istringstream ns(rd.raw_line());
          TreeNode node;
          node.feature = Reader::take<int>(ns, "node feature");
          node.threshold = Reader::take<double>(ns, "node threshold");
          node.left = Reader::take<int>(ns, "node left");
          node.right = Reader::take<int>(ns, "node right");
          node.positive_fraction = Reader::take<double>(ns, "node fraction");
          const auto limit = static_cast<int>(nn);
          if (node.feature >= p || (node.feature >= 0 && (node.left <= static_cast<int>(i) || node.left >= limit ||
                                                           node.right <= static_cast<int>(i) || node.right >= limit)))
            throw SchemaError("model file: malformed tree node");
          tree.nodes.push_back(node);
        }
        if (tree.nodes.empty()) throw SchemaError("model file: empty tree");
        rf.trees.push_back(std::move(tree));
      }
      if (rf.trees.empty()) throw SchemaError("model file: forest has no trees");
      m.params = std::move(rf);
      break;
    }
    case ModelKind::kSvmSigmoid: {
      SvmModel sv;
      auto gs = rd.line("gamma");
      sv.gamma = Reader::take<double>(gs, "gamma");
      auto rs = rd.line("rho");
      sv.rho = Reader::take<double>(rs, "rho");
      auto ss = rd.line("support");
      const auto ns = Reader::take<Eigen::Index>(ss, "support count");
      sv.support.resize(ns, p);
      sv.coef.resize(ns);
      for (Eigen::Index i = 0; i < ns; ++i) {
        std::istringstream ls(rd.raw_line());
        sv.coef(i) = Reader::take<double>(ls, "coefficient");
        for (Eigen::Index j = 0; j < p; ++j) sv.support(i, j) = Reader::take<double>(ls, "support value");
      }
      m.params = std::move(sv);
      break;
    }
  }
  if (rd.raw_line() != "end") throw SchemaError("model file: missing end marker");
  return m;
}

inline void save_model(const std::string& path, const TrainedModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write model file: " + path);
  write_model(os, m);
  if (!os) throw IoError("failed writing model file: " + path);
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open model file: " + path);
  return read_model(is);
}

}  // namespace fundusq::ml
