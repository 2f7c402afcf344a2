#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/matrix.hpp"

namespace fundusq {

namespace detail {

inline std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) noexcept {
  if (i < 0) return 0;
  if (i >= static_cast<std::ptrdiff_t>(n)) return n - 1;
  return static_cast<std::size_t>(i);
}

}  // namespace detail

/// Same-size 2D convolution (kernel flipped, not correlation) with edge
/// replication at the borders. Kernel dimensions must be odd.
template <typename T>
RealMatrix convolve2d(const Matrix<T>& img, const RealMatrix& kernel) {
  if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0) {
    throw InvalidArgument("convolve2d: kernel dimensions must be odd");
  }
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  const auto kr = static_cast<std::ptrdiff_t>(kernel.rows());
  const auto kc = static_cast<std::ptrdiff_t>(kernel.cols());
  const std::ptrdiff_t ar = kr / 2;
  const std::ptrdiff_t ac = kc / 2;

  // Column lookup tables avoid a clamp per tap in the inner loop.
  std::vector<std::size_t> col_index(cols * static_cast<std::size_t>(kc));
  for (std::size_t c = 0; c < cols; ++c)
    for (std::ptrdiff_t j = 0; j < kc; ++j)
      col_index[c * kc + j] =
          detail::clamp_index(static_cast<std::ptrdiff_t>(c) + ac - j, cols);

  RealMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t i = 0; i < kr; ++i) {
      const std::size_t src_r =
          detail::clamp_index(static_cast<std::ptrdiff_t>(r) + ar - i, rows);
      const auto src = img.row(src_r);
      for (std::ptrdiff_t j = 0; j < kc; ++j) {
        const double k = kernel(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (k == 0.0) continue;
        for (std::size_t c = 0; c < cols; ++c) {
          out(r, c) += k * static_cast<double>(src[col_index[c * kc + j]]);
        }
      }
    }
  }
  return out;
}

/// Normalised 1D Gaussian taps, truncated at ceil(4 sigma).
inline std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_taps: sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : taps) v /= sum;
  return taps;
}

template <typename T>
RealMatrix convolve_separable(const Matrix<T>& img, const std::vector<double>& row_taps,
                              const std::vector<double>& col_taps) {
  const RealMatrix horizontal = convolve2d(img, RealMatrix(1, row_taps.size(), row_taps));
  return convolve2d(horizontal, RealMatrix(col_taps.size(), 1, col_taps));
}

template <typename T>
RealMatrix gaussian_blur(const Matrix<T>& img, double sigma) {
  const auto taps = gaussian_taps(sigma);
  return convolve_separable(img, taps, taps);
}

/// Mean over a (2*radius+1)^2 window with edge replication.
template <typename T>
RealMatrix box_blur(const Matrix<T>& img, std::size_t radius) {
  const std::vector<double> taps(2 * radius + 1, 1.0 / static_cast<double>(2 * radius + 1));
  return convolve_separable(img, taps, taps);
}

/// Block-average downsampling by an integer factor; trailing partial blocks
/// average the pixels they do contain.
inline RealMatrix downscale(const RealMatrix& img, std::size_t factor) {
  if (factor == 0) throw InvalidArgument("downscale: factor must be >= 1");
  const std::size_t rows = (img.rows() + factor - 1) / factor;
  const std::size_t cols = (img.cols() + factor - 1) / factor;
  RealMatrix sum(rows, cols);
  Matrix<unsigned> count(rows, cols);
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < img.cols(); ++c) {
      sum(r / factor, c / factor) += img(r, c);
      ++count(r / factor, c / factor);
    }
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] /= count.data()[i];
  return sum;
}

/// Bilinear resampling to an arbitrary size, pixel centres aligned.
inline RealMatrix resize_bilinear(const RealMatrix& img, std::size_t rows, std::size_t cols) {
  RealMatrix out(rows, cols);
  const double sr = static_cast<double>(img.rows()) / static_cast<double>(rows);
  const double sc = static_cast<double>(img.cols()) / static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = std::clamp((static_cast<double>(r) + 0.5) * sr - 0.5, 0.0,
                                static_cast<double>(img.rows() - 1));
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, img.rows() - 1);
    const double wy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = std::clamp((static_cast<double>(c) + 0.5) * sc - 0.5, 0.0,
                                  static_cast<double>(img.cols() - 1));
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, img.cols() - 1);
      const double wx = x - static_cast<double>(x0);
      out(r, c) = (1 - wy) * ((1 - wx) * img(y0, x0) + wx * img(y0, x1)) +
                  wy * ((1 - wx) * img(y1, x0) + wx * img(y1, x1));
    }
  }
  return out;
}

}  // namespace fundusq
