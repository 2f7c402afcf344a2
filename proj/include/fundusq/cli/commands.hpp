#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fundusq/cli/config.hpp"
#include "fundusq/cli/csv.hpp"
#include "fundusq/cli/manifest.hpp"
#include "fundusq/features.hpp"
#include "fundusq/image.hpp"
#include "fundusq/ml.hpp"

namespace fundusq::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBlurry = 2;

/// Runs job(i) for i in [0, n) on up to `workers` threads.
template <typename Job>
void parallel_for(std::size_t n, std::size_t workers, Job&& job) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  for (auto& t : pool) t.join();
}

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

// ---------------------------------------------------------------- extract

/// One feature row per manifest entry, in manifest order. Failures land in
/// the error column; returns 1 if any image failed.
inline int cmd_extract(const fs::path& manifest_path, const Config& cfg, const fs::path& out,
                       std::ostream& log) {
  const Manifest manifest = load_manifest(manifest_path);
  FeatureTable table;
  table.names = feature_names(cfg.extractor);
  table.rows.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), cfg.workers, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    FeatureRow& row = table.rows[i];
    row.id = e.path;
    row.subject = e.subject;
    row.label = e.label;
    try {
      row.values = extract_features(load_image(manifest.resolve(e)), cfg.extractor);
    } catch (const std::exception& ex) {
      row.values.clear();
      row.error = ex.what();
      if (row.error.empty()) row.error = "extraction failed";
    }
  });

  std::size_t failed = 0;
  for (const auto& r : table.rows)
    if (!r.error.empty()) {
      ++failed;
      log << "extract: " << r.id << ": " << r.error << '\n';
    }
  auto os = open_output(out);
  write_feature_csv(os, table);
  log << "extract: " << table.rows.size() - failed << " ok, " << failed << " failed -> "
      << out.string() << '\n';
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- pca

inline std::vector<std::string> pca_cluster(const std::string& name,
                                            const std::vector<std::string>& available) {
  std::vector<std::string> wanted;
  if (name == "statistical") {
    wanted = {"efc", "nefc", "mean_pixel_energy", "shannon_entropy"};
  } else if (name == "gradient") {
    wanted = {"tenengrad", "mean_abs_laplacian", "perivascular_tenengrad",
              "perivascular_abs_laplacian"};
  } else if (name == "wavelet") {
    for (const auto& n : available)
      if (n.rfind("wavelet_", 0) == 0) wanted.push_back(n);
  } else {
    throw InvalidArgument("pca: unknown cluster '" + name + "' (statistical, gradient, wavelet)");
  }
  std::vector<std::string> present;
  for (const auto& n : wanted)
    if (std::find(available.begin(), available.end(), n) != available.end()) present.push_back(n);
  if (present.size() < 2)
    throw InvalidArgument("pca: cluster '" + name + "' has fewer than 2 features in the input");
  return present;
}

inline int cmd_pca(const fs::path& features_csv, const std::string& cluster, const fs::path& out,
                   std::ostream& log) {
  std::ifstream is(features_csv);
  if (!is) throw IoError("cannot open " + features_csv.string());
  const FeatureTable table = read_feature_csv(is);
  const std::vector<std::string> cols = pca_cluster(cluster, table.names);
  std::vector<const FeatureRow*> rows;
  for (const auto& r : table.rows)
    if (r.error.empty()) rows.push_back(&r);
  const ml::FeatureMatrix data = to_feature_matrix(table, false).select(cols);

  const Eigen::MatrixXd xs = ml::fit_scaler(data.x).apply(data.x);
  const ml::PcaModel pca = ml::fit_pca(xs, 2);
  const Eigen::MatrixXd proj = pca.project(xs);

  auto os = open_output(out);
  os << "# cluster=" << cluster << '\n' << "# features=";
  for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j];
  os << '\n' << "# explained_variance=" << format_double(pca.explained(0)) << ','
     << format_double(pca.explained(1)) << '\n';
  os << "id,label,pc1,pc2\n";
  for (Eigen::Index i = 0; i < proj.rows(); ++i)
    os << csv_field(rows[static_cast<std::size_t>(i)]->id) << ','
       << label_text(rows[static_cast<std::size_t>(i)]->label) << ',' << format_double(proj(i, 0))
       << ',' << format_double(proj(i, 1)) << '\n';
  log << "pca: " << cluster << " over " << cols.size() << " features, " << proj.rows()
      << " rows -> " << out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- train

inline nlohmann::json report_json(const ml::TrainedModel& model, const ml::EvaluationReport& r,
                                  const ml::FeatureMatrix& train, const ml::FeatureMatrix& test,
                                  const Config& cfg) {
  nlohmann::json j;
  j["kind"] = ml::kind_name(model.kind);
  j["schema"] = model.schema;
  j["seed"] = cfg.seed;
  j["split"] = cfg.split == ml::SplitMode::kSubject ? "subject" : "image";
  j["features"] = model.feature_names;
  j["train_ids"] = train.ids;
  j["test_ids"] = test.ids;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn},
                    {"fn", r.confusion.fn}};
  j["threshold"] = ml::kDecisionThreshold;
  j["f1"] = r.f1;
  j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  j["roc"] = roc;
  if (!model.cv_mean_f1.empty()) {
    const auto& lr = std::get<ml::LogisticModel>(model.params);
    j["cv"] = {{"c_grid", cfg.train_options().logreg.c_grid},
               {"mean_f1", model.cv_mean_f1},
               {"chosen_c", lr.c}};
  }
  return j;
}

inline std::string report_table(const ml::TrainedModel& model, const ml::EvaluationReport& r,
                                std::size_t n_train, std::size_t n_test) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "model      " << ml::kind_name(model.kind) << '\n';
  os << "train/test " << n_train << " / " << n_test << '\n';
  os << "features   " << model.feature_names.size() << '\n';
  os << '\n' << "              pred good  pred bad\n";
  os << "actual good   " << std::setw(9) << r.confusion.tp << "  " << std::setw(8) << r.confusion.fn << '\n';
  os << "actual bad    " << std::setw(9) << r.confusion.fp << "  " << std::setw(8) << r.confusion.tn << '\n';
  os << '\n' << "F1         " << r.f1 << '\n';
  os << "AUC        " << (r.auc ? std::to_string(*r.auc) : std::string("undefined (single-class test set)")) << '\n';
  return os.str();
}

struct TrainOutcome {
  ml::TrainedModel model;
  ml::EvaluationReport report;
  ml::FeatureMatrix train;
  ml::FeatureMatrix test;
};

/// Drops excluded columns, splits, trains on the train part and scores the
/// held-out part.
inline TrainOutcome train_and_evaluate(const ml::FeatureMatrix& all, ml::ModelKind kind,
                                       const Config& cfg) {
  const ml::FeatureMatrix data = all.without(cfg.exclude_features);
  data.validate();
  ml::require_both_classes(data.labels, "train");
  const ml::SplitIndices split = ml::split_dataset(data, cfg.test_fraction, cfg.seed, cfg.split);
  TrainOutcome out;
  out.train = data.subset(split.train);
  out.test = data.subset(split.test);
  out.model = ml::train_model(kind, out.train, std::string(kFeatureSchemaVersion), cfg.train_options());
  out.report = ml::evaluate_scores(out.model.predict(out.test), out.test.labels);
  return out;
}

/// Splits, trains, evaluates on the held-out part and writes the model plus
/// `<out>.report.json` and `<out>.report.txt`.
inline int cmd_train(const fs::path& features_csv, ml::ModelKind kind, const Config& cfg,
                     const fs::path& out, std::ostream& log) {
  std::ifstream is(features_csv);
  if (!is) throw IoError("cannot open " + features_csv.string());
  const std::vector<std::string> expected = feature_names(cfg.extractor);
  const FeatureTable table = read_feature_csv(is, &expected);
  for (const auto& r : table.rows)
    if (!r.error.empty()) log << "train: skipping failed row " << r.id << '\n';
  const ml::FeatureMatrix all = to_feature_matrix(table, true);
  if (all.rows() == 0) throw InvalidArgument("train: no usable rows");

  const TrainOutcome res = train_and_evaluate(all, kind, cfg);
  {
    auto os = open_output(out);
    ml::write_model(os, res.model);
  }
  {
    auto os = open_output(out.string() + ".report.json");
    os << report_json(res.model, res.report, res.train, res.test, cfg).dump(2) << '\n';
  }
  const std::string text = report_table(res.model, res.report, res.train.rows(), res.test.rows());
  {
    auto os = open_output(out.string() + ".report.txt");
    os << text;
  }
  log << text;
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoredImage {
  std::string path;
  double score = 0.0;
  std::vector<double> features;
  std::string error;
};

/// Checks that the model was trained on features this extractor produces and
/// returns their column positions.
inline std::vector<std::size_t> model_columns(const ml::TrainedModel& model, const Config& cfg) {
  if (model.schema != kFeatureSchemaVersion)
    throw SchemaError("model was trained on feature schema '" + model.schema +
                      "' but this extractor produces '" + std::string(kFeatureSchemaVersion) + "'");
  const std::vector<std::string> names = feature_names(cfg.extractor);
  std::vector<std::size_t> cols;
  for (const auto& n : model.feature_names) {
    const auto it = std::find(names.begin(), names.end(), n);
    if (it == names.end())
      throw SchemaError("model feature '" + n + "' is not produced by the configured extractor");
    cols.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  return cols;
}

/// Writes `path,score,verdict,<features>,error` rows. Exit 0 if every image is
/// acceptable, 2 if any is blurry, 1 if any image could not be scored.
inline int cmd_score(const fs::path& model_path, const std::vector<std::string>& images,
                     const Config& cfg, std::ostream& out, std::ostream& log) {
  const ml::TrainedModel model = ml::load_model(model_path.string());
  const std::vector<std::size_t> cols = model_columns(model, cfg);

  std::vector<ScoredImage> results(images.size());
  parallel_for(images.size(), cfg.workers, [&](std::size_t i) {
    ScoredImage& r = results[i];
    r.path = images[i];
    try {
      const std::vector<double> all = extract_features(load_image(images[i]), cfg.extractor);
      Eigen::MatrixXd row(1, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) {
        r.features.push_back(all[cols[j]]);
        row(0, static_cast<Eigen::Index>(j)) = all[cols[j]];
      }
      r.score = model.predict(row).front();
    } catch (const std::exception& ex) {
      r.error = ex.what();
    }
  });

  out << "path,score,verdict";
  for (const auto& n : model.feature_names) out << ',' << n;
  out << ",error\n";
  bool any_blurry = false, any_error = false;
  for (const auto& r : results) {
    const bool ok = r.error.empty();
    const bool acceptable = ok && r.score >= ml::kDecisionThreshold;
    any_error |= !ok;
    any_blurry |= ok && !acceptable;
    out << csv_field(r.path) << ',' << (ok ? format_double(r.score) : "") << ','
        << (ok ? (acceptable ? "acceptable" : "blurry") : "");
    for (std::size_t j = 0; j < model.feature_names.size(); ++j)
      out << ',' << (ok ? format_double(r.features[j]) : "");
    out << ',' << csv_field(r.error) << '\n';
    if (!ok) log << "score: " << r.path << ": " << r.error << '\n';
  }
  if (any_error) return kExitFailure;
  return any_blurry ? kExitBlurry : kExitOk;
}

// ---------------------------------------------------------------- dump-debug

/// Writes the intermediate maps of one image as 16-bit PNGs into `dir`.
inline int cmd_dump_debug(const fs::path& image, const Config& cfg, const fs::path& dir,
                          std::ostream& log) {
  const GrayImage gray = to_grayscale(load_image(image));
  const FeatureMaps maps = compute_maps(gray, cfg.extractor);
  fs::create_directories(dir);
  const std::string stem = image.stem().string();
  const std::vector<std::pair<std::string, const RealMatrix*>> dumps{
      {"gray", &gray.pixels()},
      {"gradient", &maps.gradient.magnitude},
      {"laplacian", &maps.laplacian},
      {"vesselness", &maps.vesselness.response},
      {"perivascular", &maps.perivascular.weights}};
  for (const auto& [name, m] : dumps) {
    const fs::path p = dir / (stem + "_" + name + ".png");
    save_png16(*m, p);
    log << "dump-debug: " << p.string() << '\n';
  }
  const fs::path mp = dir / (stem + "_mask.png");
  save_png16(maps.mask, mp);
  log << "dump-debug: " << mp.string() << '\n';
  return kExitOk;
}

}  // namespace fundusq::cli
