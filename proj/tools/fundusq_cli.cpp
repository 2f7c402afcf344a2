// fundusq: feature extraction, PCA export, training and scoring for fundus photographs.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fundusq/cli/commands.hpp"

namespace fq = fundusq;
namespace fc = fundusq::cli;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool mask_all = false;
  std::optional<std::string> split;
  std::optional<std::size_t> frangi_downscale;
};

fc::Config resolve_config(const GlobalFlags& g) {
  fc::Config cfg = g.config.empty() ? fc::Config{} : fc::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.workers) cfg.workers = *g.workers;
  if (g.mask_all) cfg.extractor.mask_all_metrics = true;
  if (g.split) cfg.split = fc::parse_split_mode(*g.split);
  if (g.frangi_downscale) cfg.extractor.frangi.downscale = *g.frangi_downscale;
  fc::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fundusq: focus-quality features and classifiers for fundus images"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "flat key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed for splits, folds and forests");
  app.add_option("--workers", g.workers, "images processed concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--mask-all-metrics", g.mask_all, "restrict every metric to the fundus mask");
  app.add_option("--split", g.split, "train/test split unit")->check(CLI::IsMember({"subject", "image"}));
  app.add_option("--frangi-downscale", g.frangi_downscale, "block-average factor before Frangi")
      ->check(CLI::PositiveNumber);

  std::string manifest, out, features, cluster, kind = "logreg_cv", model, image, outdir;
  std::vector<std::string> images;

  auto* extract = app.add_subcommand("extract", "feature CSV from a manifest");
  extract->add_option("manifest", manifest, "manifest (.csv or .json)")->required();
  extract->add_option("-o,--out", out, "output CSV")->required();

  auto* pca = app.add_subcommand("pca", "2-component PCA of one feature cluster");
  pca->add_option("features", features, "feature CSV")->required();
  pca->add_option("--cluster", cluster, "statistical, gradient or wavelet")->required();
  pca->add_option("-o,--out", out, "output CSV")->required();

  auto* train = app.add_subcommand("train", "split, train and evaluate a classifier");
  train->add_option("features", features, "feature CSV")->required();
  train->add_option("--kind", kind, "logreg_cv, random_forest or svm_sigmoid")
      ->check(CLI::IsMember({"logreg_cv", "random_forest", "svm_sigmoid"}));
  train->add_option("-o,--out", out, "model file")->required();

  auto* score = app.add_subcommand("score", "score images with a trained model");
  score->add_option("--model", model, "model file")->required()->check(CLI::ExistingFile);
  score->add_option("--manifest", manifest, "take image paths from a manifest");
  score->add_option("images", images, "image paths");
  score->add_option("-o,--out", out, "write results here instead of stdout");

  auto* dump = app.add_subcommand("dump-debug", "write intermediate maps as 16-bit PNGs");
  dump->add_option("image", image, "input image")->required();
  dump->add_option("-o,--out", outdir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const fc::Config cfg = resolve_config(g);
    if (*extract) return fc::cmd_extract(manifest, cfg, out, std::cerr);
    if (*pca) return fc::cmd_pca(features, cluster, out, std::cerr);
    if (*train) return fc::cmd_train(features, fq::ml::kind_from_name(kind), cfg, out, std::cerr);
    if (*score) {
      if (!manifest.empty()) {
        const fc::Manifest m = fc::load_manifest(manifest);
        for (const auto& e : m.entries) images.push_back(m.resolve(e).string());
      }
      if (images.empty()) throw fq::InvalidArgument("score: no images given");
      if (out.empty()) return fc::cmd_score(model, images, cfg, std::cout, std::cerr);
      auto os = fc::open_output(out);
      return fc::cmd_score(model, images, cfg, os, std::cerr);
    }
    if (*dump) return fc::cmd_dump_debug(image, cfg, outdir, std::cerr);
  } catch (const std::exception& ex) {
    std::cerr << "fundusq: " << ex.what() << '\n';
    return fc::kExitFailure;
  }
  return fc::kExitFailure;
}
