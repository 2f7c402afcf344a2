#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/matrix.hpp"

// One-level separable 2D DWT with half-sample symmetric extension. Filter
// conventions and coefficient layout follow PyWavelets: analysis output k is
// sum_j h[j] * x[2k + 1 - j], giving floor((N + F - 1) / 2) coefficients.

namespace fundusq {

struct WaveletFamily {
  std::string name;
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
  std::vector<double> rec_lo;
  std::vector<double> rec_hi;
  bool orthogonal = false;

  [[nodiscard]] std::size_t length() const noexcept { return dec_lo.size(); }
};

/// kSymmetric: half-sample symmetric extension, floor((N+F-1)/2) outputs.
/// kPeriodization: circular extension of even-length input, N/2 outputs;
/// orthogonal families are then exactly energy preserving.
enum class BoundaryMode { kSymmetric, kPeriodization };

struct WaveletDecomposition {
  RealMatrix approximation;
  RealMatrix horizontal;  // detail along rows (axis 0), smooth along columns
  RealMatrix vertical;    // smooth along rows, detail along columns
  RealMatrix diagonal;
};

namespace detail {

/// Quadrature mirror construction used by orthogonal families.
inline WaveletFamily orthogonal_family(std::string name, std::vector<double> rec_lo) {
  const std::size_t n = rec_lo.size();
  WaveletFamily w;
  w.name = std::move(name);
  w.orthogonal = true;
  w.dec_lo.assign(rec_lo.rbegin(), rec_lo.rend());
  w.rec_hi.resize(n);
  w.dec_hi.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // rec_hi[k] = (-1)^k * rec_lo[n-1-k]; dec_hi is its reverse.
    w.rec_hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * rec_lo[n - 1 - k];
  }
  w.dec_hi.assign(w.rec_hi.rbegin(), w.rec_hi.rend());
  w.rec_lo = std::move(rec_lo);
  return w;
}

}  // namespace detail

inline const WaveletFamily& haar() {
  static const WaveletFamily w =
      detail::orthogonal_family("haar", {0.7071067811865476, 0.7071067811865476});
  return w;
}

/// Daubechies, 7 vanishing moments (14 taps).
inline const WaveletFamily& daubechies7() {
  static const WaveletFamily w = detail::orthogonal_family(
      "db7", {0.07785205408500918, 0.3965393194819173, 0.7291320908462351, 0.4697822874051931,
              -0.14390600392856498, -0.22403618499387498, 0.07130921926683026,
              0.08061260915108308, -0.03802993693501441, -0.01657454163066688,
              0.01255099855609984, 0.0004295779729213665, -0.0018016407040474908,
              0.00035371379997452024});
  return w;
}

/// Daubechies, 8 vanishing moments (16 taps).
inline const WaveletFamily& daubechies8() {
  static const WaveletFamily w = detail::orthogonal_family(
      "db8", {0.05441584224310401, 0.31287159091429995, 0.6756307362972898, 0.5853546836542067,
              -0.015829105256349306, -0.2840155429615469, 0.0004724845739132828,
              0.12874742662047847, -0.017369301001807547, -0.044088253930794755,
              0.013981027917398282, 0.008746094047405777, -0.004870352993451574,
              -0.00039174037337694705, 0.0006754494064505693, -0.00011747678412476953});
  return w;
}

/// Biorthogonal 1.5: Haar synthesis lowpass, 10-tap symmetric analysis lowpass.
inline const WaveletFamily& biorthogonal15() {
  static const WaveletFamily w = [] {
    constexpr double a = 0.016572815184059706;
    constexpr double b = 0.12153397801643785;
    constexpr double h = 0.7071067811865476;
    WaveletFamily f;
    f.name = "bior1.5";
    f.dec_lo = {a, -a, -b, b, h, h, b, -b, -a, a};
    f.dec_hi = {0, 0, 0, 0, -h, h, 0, 0, 0, 0};
    f.rec_lo = {0, 0, 0, 0, h, h, 0, 0, 0, 0};
    f.rec_hi = {a, a, -b, -b, h, -h, b, b, -a, -a};
    return f;
  }();
  return w;
}

/// Accepts "haar", "db7", "db8", "bior1.5".
inline const WaveletFamily& wavelet_by_name(std::string_view name) {
  if (name == "haar") return haar();
  if (name == "db7") return daubechies7();
  if (name == "db8") return daubechies8();
  if (name == "bior1.5") return biorthogonal15();
  throw InvalidArgument("unknown wavelet family: " + std::string(name));
}

inline std::size_t dwt_length(std::size_t n, std::size_t filter_len,
                              BoundaryMode mode = BoundaryMode::kSymmetric) noexcept {
  return mode == BoundaryMode::kSymmetric ? (n + filter_len - 1) / 2 : n / 2;
}

inline std::size_t wrap_index(std::ptrdiff_t i, std::size_t n) noexcept {
  const auto len = static_cast<std::ptrdiff_t>(n);
  i %= len;
  return static_cast<std::size_t>(i < 0 ? i + len : i);
}

/// Half-sample symmetric reflection of an arbitrary index into [0, n).
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept {
  const auto len = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * len;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < len ? i : period - 1 - i);
}

inline void dwt1d(std::span<const double> x, const WaveletFamily& w, std::span<double> lo,
                  std::span<double> hi, BoundaryMode mode = BoundaryMode::kSymmetric) {
  const std::size_t n = x.size();
  const std::size_t f = w.length();
  const std::size_t out_len = dwt_length(n, f, mode);
  const bool symmetric = mode == BoundaryMode::kSymmetric;
  for (std::size_t k = 0; k < out_len; ++k) {
    double sl = 0.0;
    double sh = 0.0;
    const auto centre = static_cast<std::ptrdiff_t>(2 * k + 1);
    for (std::size_t j = 0; j < f; ++j) {
      const std::ptrdiff_t i = centre - static_cast<std::ptrdiff_t>(j);
      const double v = x[symmetric ? reflect_index(i, n) : wrap_index(i, n)];
      sl += w.dec_lo[j] * v;
      sh += w.dec_hi[j] * v;
    }
    lo[k] = sl;
    hi[k] = sh;
  }
}

/// Inverse of dwt1d; output length 2C - F + 2 (symmetric) or 2C (periodization).
inline void idwt1d(std::span<const double> lo, std::span<const double> hi,
                   const WaveletFamily& w, std::span<double> out,
                   BoundaryMode mode = BoundaryMode::kSymmetric) {
  const std::size_t f = w.length();
  const std::size_t c = lo.size();
  if (mode == BoundaryMode::kPeriodization) {
    // Transpose of the circular analysis with the dual (time-reversed
    // synthesis) filters.
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t j = 0; j < f; ++j) {
        const std::size_t i = wrap_index(static_cast<std::ptrdiff_t>(2 * k + 1) -
                                             static_cast<std::ptrdiff_t>(j),
                                         out.size());
        out[i] += w.rec_lo[f - 1 - j] * lo[k] + w.rec_hi[f - 1 - j] * hi[k];
      }
    return;
  }
  for (std::size_t o = 0; o < out.size(); ++o) {
    double s = 0.0;
    const std::size_t n = o + f - 2;  // index into the full upsampled convolution
    for (std::size_t j = 0; j < f; ++j) {
      if (j > n) break;
      const std::size_t u = n - j;
      if (u % 2 != 0 || u / 2 >= c) continue;
      s += w.rec_lo[j] * lo[u / 2] + w.rec_hi[j] * hi[u / 2];
    }
    out[o] = s;
  }
}

inline WaveletDecomposition dwt2(const RealMatrix& img, const WaveletFamily& w,
                                 BoundaryMode mode = BoundaryMode::kSymmetric) {
  const std::size_t f = w.length();
  if (img.rows() < f || img.cols() < f) {
    throw InvalidArgument("dwt2: image smaller than the " + w.name + " filter (" +
                          std::to_string(f) + " taps)");
  }
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  if (mode == BoundaryMode::kPeriodization && (rows % 2 != 0 || cols % 2 != 0)) {
    throw InvalidArgument("dwt2: periodization needs even dimensions");
  }
  const std::size_t out_r = dwt_length(rows, f, mode);
  const std::size_t out_c = dwt_length(cols, f, mode);

  // Along axis 0 (down each column) first.
  RealMatrix col_lo(out_r, cols);
  RealMatrix col_hi(out_r, cols);
  std::vector<double> line(rows), lo(out_r), hi(out_r);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) line[r] = img(r, c);
    dwt1d(line, w, lo, hi, mode);
    for (std::size_t r = 0; r < out_r; ++r) {
      col_lo(r, c) = lo[r];
      col_hi(r, c) = hi[r];
    }
  }

  WaveletDecomposition dec{RealMatrix(out_r, out_c), RealMatrix(out_r, out_c),
                           RealMatrix(out_r, out_c), RealMatrix(out_r, out_c)};
  std::vector<double> lo_c(out_c), hi_c(out_c);
  for (std::size_t r = 0; r < out_r; ++r) {
    dwt1d(col_lo.row(r), w, lo_c, hi_c, mode);
    for (std::size_t c = 0; c < out_c; ++c) {
      dec.approximation(r, c) = lo_c[c];
      dec.vertical(r, c) = hi_c[c];
    }
    dwt1d(col_hi.row(r), w, lo_c, hi_c, mode);
    for (std::size_t c = 0; c < out_c; ++c) {
      dec.horizontal(r, c) = lo_c[c];
      dec.diagonal(r, c) = hi_c[c];
    }
  }
  return dec;
}

inline RealMatrix idwt2(const WaveletDecomposition& dec, const WaveletFamily& w,
                        BoundaryMode mode = BoundaryMode::kSymmetric) {
  const std::size_t f = w.length();
  const std::size_t in_r = dec.approximation.rows();
  const std::size_t in_c = dec.approximation.cols();
  const bool symmetric = mode == BoundaryMode::kSymmetric;
  if (symmetric && (2 * in_r + 2 < f || 2 * in_c + 2 < f)) {
    throw InvalidArgument("idwt2: sub-bands too small");
  }
  const std::size_t rows = symmetric ? 2 * in_r + 2 - f : 2 * in_r;
  const std::size_t cols = symmetric ? 2 * in_c + 2 - f : 2 * in_c;

  RealMatrix col_lo(in_r, cols);
  RealMatrix col_hi(in_r, cols);
  for (std::size_t r = 0; r < in_r; ++r) {
    std::span<double> dst_lo(&col_lo(r, 0), cols);
    std::span<double> dst_hi(&col_hi(r, 0), cols);
    idwt1d(dec.approximation.row(r), dec.vertical.row(r), w, dst_lo, mode);
    idwt1d(dec.horizontal.row(r), dec.diagonal.row(r), w, dst_hi, mode);
  }

  RealMatrix out(rows, cols);
  std::vector<double> lo(in_r), hi(in_r), line(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < in_r; ++r) {
      lo[r] = col_lo(r, c);
      hi[r] = col_hi(r, c);
    }
    idwt1d(lo, hi, w, line, mode);
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = line[r];
  }
  return out;
}

}  // namespace fundusq
