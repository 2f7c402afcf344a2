#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/features.hpp"
#include "fundusq/ml/model.hpp"
#include "fundusq/ml/split.hpp"

namespace fundusq::cli {

/// Everything a run needs. Defaults match the documented config keys.
struct Config {
  ExtractorConfig extractor{};
  std::size_t logreg_folds = 5;
  std::size_t forest_trees = 100;
  double svm_c = 1.0;
  ml::SplitMode split = ml::SplitMode::kSubject;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::vector<std::string> exclude_features{"tenengrad_thresholded"};

  [[nodiscard]] ml::TrainOptions train_options() const {
    ml::TrainOptions o;
    o.logreg.folds = logreg_folds;
    o.logreg.seed = seed;
    o.forest.trees = forest_trees;
    o.forest.seed = seed;
    o.svm.c = svm_c;
    return o;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  return d;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw InvalidArgument("config: " + key + " expects a non-negative integer, got '" + v + "'");
  return std::stoull(v);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config: " + key + " expects true/false, got '" + v + "'");
}

}  // namespace detail

inline ml::SplitMode parse_split_mode(const std::string& v) {
  if (v == "subject") return ml::SplitMode::kSubject;
  if (v == "image") return ml::SplitMode::kImage;
  throw InvalidArgument("split must be 'subject' or 'image', got '" + v + "'");
}

/// Applies one key=value pair; unknown keys are an error.
inline void set_config_value(Config& cfg, const std::string& key, const std::string& v) {
  using namespace detail;
  auto& ex = cfg.extractor;
  if (key == "mask_threshold") {
    ex.mask_threshold = to_double(key, v);
  } else if (key == "tenengrad_tau") {
    if (!v.empty() && v[0] == 'p') {
      const double q = to_double(key, v.substr(1));
      if (!(q >= 0.0 && q <= 100.0)) throw InvalidArgument("config: tenengrad_tau percentile outside [0,100]");
      ex.tau = {TauPolicy::Kind::kPercentile, q / 100.0};
    } else {
      ex.tau = {TauPolicy::Kind::kFixed, to_double(key, v)};
    }
  } else if (key == "frangi_scales") {
    ex.frangi.scales.clear();
    for (const auto& s : split_list(v)) ex.frangi.scales.push_back(to_double(key, s));
  } else if (key == "frangi_beta") {
    ex.frangi.beta = to_double(key, v);
  } else if (key == "frangi_c") {
    ex.frangi.c = to_double(key, v);
  } else if (key == "frangi_dark_vessels") {
    ex.frangi.dark_vessels = to_bool(key, v);
  } else if (key == "frangi_downscale") {
    ex.frangi.downscale = to_count(key, v);
  } else if (key == "perivascular_variant") {
    if (v == "literal") ex.perivascular = PerivascularVariant::kLiteral;
    else if (v == "frobenius") ex.perivascular = PerivascularVariant::kFrobenius;
    else throw InvalidArgument("config: perivascular_variant must be literal or frobenius");
  } else if (key == "perivascular_normalise") {
    if (v == "pixels") ex.weighting = WeightNormalisation::kPixelCount;
    else if (v == "weight") ex.weighting = WeightNormalisation::kMaskWeight;
    else throw InvalidArgument("config: perivascular_normalise must be pixels or weight");
  } else if (key == "wavelets") {
    ex.wavelets = split_list(v);
    for (const auto& w : ex.wavelets) wavelet_by_name(w);
  } else if (key == "mask_all_metrics") {
    ex.mask_all_metrics = to_bool(key, v);
  } else if (key == "logreg_folds") {
    cfg.logreg_folds = to_count(key, v);
  } else if (key == "forest_trees") {
    cfg.forest_trees = to_count(key, v);
  } else if (key == "svm_c") {
    cfg.svm_c = to_double(key, v);
  } else if (key == "split") {
    cfg.split = parse_split_mode(v);
  } else if (key == "test_fraction") {
    cfg.test_fraction = to_double(key, v);
  } else if (key == "seed") {
    cfg.seed = to_count(key, v);
  } else if (key == "workers") {
    cfg.workers = to_count(key, v);
  } else if (key == "exclude_features") {
    cfg.exclude_features = split_list(v);
  } else {
    throw InvalidArgument("config: unknown key '" + key + "'");
  }
}

inline void validate(const Config& cfg) {
  const auto& ex = cfg.extractor;
  if (!(ex.mask_threshold > 0.0 && ex.mask_threshold < 1.0))
    throw InvalidArgument("config: mask_threshold must lie in (0, 1)");
  if (ex.tau.kind == TauPolicy::Kind::kFixed && !(ex.tau.value >= 0.0))
    throw InvalidArgument("config: tenengrad_tau must be >= 0");
  ex.frangi.validate();
  if (cfg.logreg_folds < 2) throw InvalidArgument("config: logreg_folds must be >= 2");
  if (cfg.forest_trees < 1) throw InvalidArgument("config: forest_trees must be >= 1");
  if (!(cfg.svm_c > 0.0)) throw InvalidArgument("config: svm_c must be > 0");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
    throw InvalidArgument("config: test_fraction must lie in (0, 1)");
  if (cfg.workers < 1) throw InvalidArgument("config: workers must be >= 1");
}

/// Flat `key = value` lines; `#` starts a comment.
inline Config parse_config(std::istream& is) {
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  return parse_config(is);
}

}  // namespace fundusq::cli
