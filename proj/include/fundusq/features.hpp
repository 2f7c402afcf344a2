#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fundusq/grad_metrics.hpp"
#include "fundusq/image.hpp"
#include "fundusq/stat_metrics.hpp"
#include "fundusq/vesselness.hpp"
#include "fundusq/wavelet_metrics.hpp"

namespace fundusq {

/// Bumped whenever a feature definition or the column order changes.
inline constexpr std::string_view kFeatureSchemaVersion = "fundusq-features/1";

struct ExtractorConfig {
  double mask_threshold = kDefaultMaskThreshold;
  TauPolicy tau{};
  FrangiParams frangi{};
  PerivascularVariant perivascular = PerivascularVariant::kLiteral;
  WeightNormalisation weighting = WeightNormalisation::kPixelCount;
  std::vector<std::string> wavelets{"db7", "db8", "bior1.5", "haar"};
  /// Restrict statistical and gradient metrics to the fundus mask as well.
  bool mask_all_metrics = false;
};

inline const std::vector<std::string>& statistical_feature_names() {
  static const std::vector<std::string> names{"mean_pixel_energy", "rms_channel_energy",
                                              "shannon_entropy", "efc", "nefc"};
  return names;
}

inline const std::vector<std::string>& gradient_feature_names() {
  static const std::vector<std::string> names{"tenengrad", "tenengrad_thresholded",
                                              "mean_abs_laplacian", "energy_laplacian",
                                              "log_pech_pacheco"};
  return names;
}

inline const std::vector<std::string>& perivascular_feature_names() {
  static const std::vector<std::string> names{"perivascular_tenengrad",
                                              "perivascular_abs_laplacian"};
  return names;
}

/// "bior1.5" -> "bior1_5", so column names stay identifier-like.
inline std::string wavelet_tag(std::string_view family) {
  std::string tag(family);
  for (auto& ch : tag)
    if (ch == '.') ch = '_';
  return tag;
}

inline std::vector<std::string> wavelet_feature_names(const std::vector<std::string>& families) {
  std::vector<std::string> names;
  for (const auto& fam : families) {
    const std::string p = "wavelet_" + wavelet_tag(fam) + "_";
    for (const char* s : {"var_h", "var_v", "var_d", "sum_sq"}) names.push_back(p + s);
  }
  return names;
}

/// Full column order for a given configuration.
inline std::vector<std::string> feature_names(const ExtractorConfig& cfg) {
  std::vector<std::string> names = statistical_feature_names();
  for (const auto* group : {&gradient_feature_names(), &perivascular_feature_names()})
    names.insert(names.end(), group->begin(), group->end());
  const auto wav = wavelet_feature_names(cfg.wavelets);
  names.insert(names.end(), wav.begin(), wav.end());
  return names;
}

/// Intermediate maps, kept for debug dumps.
struct FeatureMaps {
  FundusMask mask;
  GradientField gradient;
  RealMatrix laplacian;
  VesselnessMap vesselness;
  PerivascularMask perivascular;
};

inline FeatureMaps compute_maps(const GrayImage& gray, const ExtractorConfig& cfg) {
  FundusMask mask = fundus_mask(gray, cfg.mask_threshold);
  GradientField g = sobel_magnitude(gray);
  RealMatrix lap = laplacian(gray);
  VesselnessMap v = frangi(gray, cfg.frangi, mask);
  PerivascularMask pm = perivascular_mask(v, cfg.perivascular);
  return {std::move(mask), std::move(g), std::move(lap), std::move(v), std::move(pm)};
}

/// Values in feature_names(cfg) order.
inline std::vector<double> extract_features(const RgbImage& rgb, const ExtractorConfig& cfg) {
  const GrayImage gray = to_grayscale(rgb);
  const FeatureMaps maps = compute_maps(gray, cfg);
  const FundusMask* restrict_to = cfg.mask_all_metrics ? &maps.mask : nullptr;

  const StatFeatures s = stat_features(rgb, gray, restrict_to);
  const GradFeatures g = grad_features(maps.gradient, maps.laplacian, cfg.tau, restrict_to);

  std::vector<double> out{s.mean_pixel_energy,
                          s.rms_channel_energy,
                          s.shannon_entropy,
                          s.efc,
                          s.nefc,
                          g.tenengrad,
                          g.tenengrad_thresholded,
                          g.mean_abs_laplacian,
                          g.energy_laplacian,
                          g.log_pech_pacheco,
                          perivascular_tenengrad(maps.gradient, maps.perivascular, cfg.weighting),
                          perivascular_abs_laplacian_of(maps.laplacian, maps.perivascular,
                                                        cfg.weighting)};
  for (const auto& fam : cfg.wavelets) {
    const WaveletFeatures w = wavelet_features(gray, wavelet_by_name(fam), maps.mask);
    out.insert(out.end(), {w.var_horizontal, w.var_vertical, w.var_diagonal, w.sum_sq});
  }
  return out;
}

}  // namespace fundusq
