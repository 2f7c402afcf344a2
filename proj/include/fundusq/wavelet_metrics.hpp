#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "fundusq/errors.hpp"
#include "fundusq/image.hpp"
#include "fundusq/matrix.hpp"
#include "fundusq/wavelet.hpp"

namespace fundusq {

struct WaveletVariances {
  double horizontal = 0.0;
  double vertical = 0.0;
  double diagonal = 0.0;
};

struct WaveletFeatures {
  double var_horizontal = 0.0;
  double var_vertical = 0.0;
  double var_diagonal = 0.0;
  double sum_sq = 0.0;
};

namespace detail {

/// Inclusive [first, last] range of source samples that feed coefficient k.
inline std::pair<std::size_t, std::size_t> footprint(std::size_t k, std::size_t n,
                                                     std::size_t filter_len) {
  const auto hi = static_cast<std::ptrdiff_t>(2 * k + 1);
  const std::ptrdiff_t lo = hi - static_cast<std::ptrdiff_t>(filter_len) + 1;
  std::size_t first = n;
  std::size_t last = 0;
  for (std::ptrdiff_t i = lo; i <= hi; ++i) {
    const std::size_t s = reflect_index(i, n);
    first = std::min(first, s);
    last = std::max(last, s);
  }
  return {first, last};
}

}  // namespace detail

/// Mask at sub-band resolution: a coefficient is inside iff its source
/// footprint touches at least one inside pixel.
inline FundusMask subband_mask(const FundusMask& mask, const WaveletFamily& w) {
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();
  // Summed-area table for O(1) rectangle occupancy queries.
  Matrix<std::uint64_t> sat(rows + 1, cols + 1, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      sat(r + 1, c + 1) = sat(r, c + 1) + sat(r + 1, c) - sat(r, c) + (mask(r, c) ? 1 : 0);

  const std::size_t out_r = dwt_length(rows, w.length());
  const std::size_t out_c = dwt_length(cols, w.length());
  std::vector<std::pair<std::size_t, std::size_t>> col_span(out_c);
  for (std::size_t c = 0; c < out_c; ++c) col_span[c] = detail::footprint(c, cols, w.length());

  Matrix<std::uint8_t> bits(out_r, out_c);
  for (std::size_t r = 0; r < out_r; ++r) {
    const auto [r0, r1] = detail::footprint(r, rows, w.length());
    for (std::size_t c = 0; c < out_c; ++c) {
      const auto [c0, c1] = col_span[c];
      const std::uint64_t hits = sat(r1 + 1, c1 + 1) - sat(r0, c1 + 1) - sat(r1 + 1, c0) + sat(r0, c0);
      bits(r, c) = hits > 0 ? 1 : 0;
    }
  }
  return FundusMask(std::move(bits));
}

namespace detail {

inline double masked_population_variance(const RealMatrix& band, const FundusMask& mask) {
  require_same_shape(band, mask, "wavelet_variances");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (mask.bits().data()[i] == 0) continue;
    sum += band.data()[i];
    ++n;
  }
  if (n == 0) throw DomainError("wavelet metrics: empty in-mask region");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (mask.bits().data()[i] == 0) continue;
    const double d = band.data()[i] - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n);
}

}  // namespace detail

/// Population variance of each detail band over in-mask coefficients. `mask`
/// must already be at sub-band resolution (see subband_mask).
inline WaveletVariances wavelet_variances(const WaveletDecomposition& dec, const FundusMask& mask) {
  return {detail::masked_population_variance(dec.horizontal, mask),
          detail::masked_population_variance(dec.vertical, mask),
          detail::masked_population_variance(dec.diagonal, mask)};
}

/// Sum over the three detail bands of the root of that band's in-mask sum of squares.
inline double wavelet_sum_sq(const WaveletDecomposition& dec, const FundusMask& mask) {
  double total = 0.0;
  std::size_t n = 0;
  for (const RealMatrix* band : {&dec.horizontal, &dec.vertical, &dec.diagonal}) {
    require_same_shape(*band, mask, "wavelet_sum_sq");
    double ss = 0.0;
    n = 0;
    for (std::size_t i = 0; i < band->size(); ++i) {
      if (mask.bits().data()[i] == 0) continue;
      ss += band->data()[i] * band->data()[i];
      ++n;
    }
    total += std::sqrt(ss);
  }
  if (n == 0) throw DomainError("wavelet metrics: empty in-mask region");
  return total;
}

/// Decompose, project the full-resolution mask onto the sub-band grid, and
/// compute all four features for one family.
inline WaveletFeatures wavelet_features(const RealMatrix& img, const WaveletFamily& w,
                                        const FundusMask& mask) {
  require_same_shape(img, mask, "wavelet_features");
  const WaveletDecomposition dec = dwt2(img, w);
  const FundusMask sub = subband_mask(mask, w);
  const WaveletVariances v = wavelet_variances(dec, sub);
  return {v.horizontal, v.vertical, v.diagonal, wavelet_sum_sq(dec, sub)};
}

}  // namespace fundusq
