#pragma once

#include <cmath>
#include <cstddef>

#include "fundusq/errors.hpp"
#include "fundusq/image.hpp"
#include "fundusq/matrix.hpp"

// Whole-image information measures. Every function optionally restricts its
// sums to a fundus mask; with no mask the sums run over all M*N pixels.

namespace fundusq {

struct StatFeatures {
  double mean_pixel_energy = 0.0;
  double rms_channel_energy = 0.0;
  double shannon_entropy = 0.0;  // bits
  double efc = 0.0;              // nats
  double nefc = 0.0;
};

namespace detail {

template <typename F>
void for_each_selected(const RealMatrix& img, const FundusMask* mask, F&& f) {
  if (mask == nullptr) {
    for (double v : img) f(v);
    return;
  }
  require_same_shape(img, *mask, "mask");
  const auto px = img.data();
  const auto bits = mask->bits().data();
  for (std::size_t i = 0; i < px.size(); ++i)
    if (bits[i] != 0) f(px[i]);
}

inline std::size_t selected_count(const RealMatrix& img, const FundusMask* mask) {
  return mask == nullptr ? img.size() : mask->count();
}

}  // namespace detail

/// Sum of squared intensities.
inline double energy(const RealMatrix& img, const FundusMask* mask = nullptr) {
  double sum = 0.0;
  detail::for_each_selected(img, mask, [&](double v) { sum += v * v; });
  return sum;
}

inline double mean_pixel_energy(const RealMatrix& img, const FundusMask* mask = nullptr) {
  const std::size_t n = detail::selected_count(img, mask);
  if (n == 0) throw DomainError("mean_pixel_energy: no pixels selected");
  return energy(img, mask) / static_cast<double>(n);
}

/// Root mean square over the three per-channel energies.
inline double rms_channel_energy(const RgbImage& img, const FundusMask* mask = nullptr) {
  double acc = 0.0;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const double e = energy(img.channel(ch), mask);
    acc += e * e;
  }
  return std::sqrt(acc / 3.0);
}

/// -sum x*log2(x) over raw pixel values, with 0*log 0 = 0. Negative values are
/// rejected rather than mapped to -inf.
inline double shannon_entropy(const RealMatrix& img, const FundusMask* mask = nullptr) {
  double sum = 0.0;
  detail::for_each_selected(img, mask, [&](double v) {
    if (v < 0.0) throw DomainError("shannon_entropy: negative pixel value");
    if (v > 0.0) sum += v * std::log2(v);
  });
  return -sum;
}

/// Entropy focus criterion: natural-log entropy of x / sqrt(energy).
inline double efc(const RealMatrix& img, const FundusMask* mask = nullptr) {
  const double s_max = std::sqrt(energy(img, mask));
  if (!(s_max > 0.0)) throw DomainError("efc: image has zero energy");
  double sum = 0.0;
  detail::for_each_selected(img, mask, [&](double v) {
    if (v < 0.0) throw DomainError("efc: negative pixel value");
    if (v > 0.0) {
      const double p = v / s_max;
      sum += p * std::log(p);
    }
  });
  return -sum;
}

/// Dimension-adjusted EFC: efc * sqrt(MN) * ln(MN)^(-1/2).
inline double nefc(const RealMatrix& img, const FundusMask* mask = nullptr) {
  const auto n = static_cast<double>(detail::selected_count(img, mask));
  if (n < 2.0) throw DomainError("nefc: needs at least two pixels");
  return efc(img, mask) * (n / std::sqrt(n)) * std::pow(std::log(n), -0.5);
}

inline StatFeatures stat_features(const RgbImage& rgb, const GrayImage& gray,
                                  const FundusMask* mask = nullptr) {
  StatFeatures f;
  f.mean_pixel_energy = mean_pixel_energy(gray, mask);
  f.rms_channel_energy = rms_channel_energy(rgb, mask);
  f.shannon_entropy = shannon_entropy(gray, mask);
  f.efc = efc(gray, mask);
  f.nefc = nefc(gray, mask);
  return f;
}

}  // namespace fundusq
