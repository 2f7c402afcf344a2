#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/filter.hpp"
#include "fundusq/image.hpp"
#include "fundusq/matrix.hpp"

namespace fundusq {

struct GradFeatures {
  double tenengrad = 0.0;
  double tenengrad_thresholded = 0.0;
  double mean_abs_laplacian = 0.0;
  double energy_laplacian = 0.0;
  double log_pech_pacheco = 0.0;
};

/// Per-pixel Sobel gradient magnitude; all entries non-negative.
struct GradientField {
  RealMatrix magnitude;
};

inline const RealMatrix& sobel_x_kernel() {
  static const RealMatrix k(3, 3, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
  return k;
}

inline const RealMatrix& sobel_y_kernel() {
  static const RealMatrix k(3, 3, {1, 2, 1, 0, 0, 0, -1, -2, -1});
  return k;
}

inline const RealMatrix& laplacian_kernel() {
  static const RealMatrix k(3, 3, {0.0, -1.0 / 6, 0.0, -1.0 / 6, 4.0 / 6, -1.0 / 6, 0.0,
                                   -1.0 / 6, 0.0});
  return k;
}

/// Equivalent to convolving with sobel_x_kernel()/sobel_y_kernel() (edge
/// replication), evaluated as differences first so constants give exact zeros.
inline GradientField sobel_magnitude(const RealMatrix& img) {
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    return img(detail::clamp_index(r, rows), detail::clamp_index(c, cols));
  };
  RealMatrix dx(rows, cols), dy(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const auto ri = static_cast<std::ptrdiff_t>(r);
      const auto ci = static_cast<std::ptrdiff_t>(c);
      dx(r, c) = at(ri, ci - 1) - at(ri, ci + 1);
      dy(r, c) = at(ri + 1, ci) - at(ri - 1, ci);
    }
  RealMatrix mag(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t up = detail::clamp_index(static_cast<std::ptrdiff_t>(r) - 1, rows);
      const std::size_t down = detail::clamp_index(static_cast<std::ptrdiff_t>(r) + 1, rows);
      const std::size_t left = detail::clamp_index(static_cast<std::ptrdiff_t>(c) - 1, cols);
      const std::size_t right = detail::clamp_index(static_cast<std::ptrdiff_t>(c) + 1, cols);
      const double gx = dx(up, c) + 2.0 * dx(r, c) + dx(down, c);
      const double gy = dy(r, left) + 2.0 * dy(r, c) + dy(r, right);
      mag(r, c) = std::hypot(gx, gy);
    }
  return {std::move(mag)};
}

/// Linear-interpolated percentile (q in [0,1]) of the selected values.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile: no values");
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

namespace detail {

template <typename F>
void for_each_index(const RealMatrix& m, const FundusMask* mask, F&& f) {
  if (mask != nullptr) require_same_shape(m, *mask, "mask");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (mask == nullptr || mask->bits().data()[i] != 0) f(i);
  }
}

inline std::size_t count_selected(const RealMatrix& m, const FundusMask* mask) {
  return mask == nullptr ? m.size() : mask->count();
}

}  // namespace detail

/// Sum of squared gradient magnitudes.
inline double tenengrad(const GradientField& g, const FundusMask* mask = nullptr) {
  double sum = 0.0;
  detail::for_each_index(g.magnitude, mask, [&](std::size_t i) {
    const double v = g.magnitude.data()[i];
    sum += v * v;
  });
  return sum;
}

inline double tenengrad(const RealMatrix& img, const FundusMask* mask = nullptr) {
  return tenengrad(sobel_magnitude(img), mask);
}

/// Only magnitudes at or above tau contribute.
inline double tenengrad_thresholded(const GradientField& g, double tau,
                                    const FundusMask* mask = nullptr) {
  if (!(tau >= 0.0)) throw InvalidArgument("tenengrad_thresholded: tau must be >= 0");
  double sum = 0.0;
  detail::for_each_index(g.magnitude, mask, [&](std::size_t i) {
    const double v = g.magnitude.data()[i];
    if (v >= tau) sum += v * v;
  });
  return sum;
}

inline double tenengrad_thresholded(const RealMatrix& img, double tau,
                                    const FundusMask* mask = nullptr) {
  return tenengrad_thresholded(sobel_magnitude(img), tau, mask);
}

/// Per-image adaptive threshold: the q-th percentile of the gradient magnitude.
inline double adaptive_tau(const GradientField& g, double q = 0.75,
                           const FundusMask* mask = nullptr) {
  std::vector<double> values;
  values.reserve(detail::count_selected(g.magnitude, mask));
  detail::for_each_index(g.magnitude, mask,
                         [&](std::size_t i) { values.push_back(g.magnitude.data()[i]); });
  return percentile(std::move(values), q);
}

/// Convolution with laplacian_kernel() (edge replication), summed as
/// center-minus-neighbour differences so constants and integer ramps give
/// exact zeros.
inline RealMatrix laplacian(const RealMatrix& img) {
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  RealMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t up = detail::clamp_index(static_cast<std::ptrdiff_t>(r) - 1, rows);
    const std::size_t down = detail::clamp_index(static_cast<std::ptrdiff_t>(r) + 1, rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t left = detail::clamp_index(static_cast<std::ptrdiff_t>(c) - 1, cols);
      const std::size_t right = detail::clamp_index(static_cast<std::ptrdiff_t>(c) + 1, cols);
      const double x = img(r, c);
      out(r, c) = ((x - img(up, c)) + (x - img(down, c)) + (x - img(r, left)) + (x - img(r, right))) / 6.0;
    }
  }
  return out;
}

inline double mean_abs_laplacian_of(const RealMatrix& lap, const FundusMask* mask = nullptr) {
  const std::size_t n = detail::count_selected(lap, mask);
  if (n == 0) throw DomainError("mean_abs_laplacian: no pixels selected");
  double sum = 0.0;
  detail::for_each_index(lap, mask, [&](std::size_t i) { sum += std::abs(lap.data()[i]); });
  return sum / static_cast<double>(n);
}

inline double mean_abs_laplacian(const RealMatrix& img, const FundusMask* mask = nullptr) {
  return mean_abs_laplacian_of(laplacian(img), mask);
}

inline double energy_laplacian_of(const RealMatrix& lap, const FundusMask* mask = nullptr) {
  double sum = 0.0;
  detail::for_each_index(lap, mask, [&](std::size_t i) {
    const double v = lap.data()[i];
    sum += v * v;
  });
  return sum;
}

inline double energy_laplacian(const RealMatrix& img, const FundusMask* mask = nullptr) {
  return energy_laplacian_of(laplacian(img), mask);
}

/// ln of the summed (not averaged) squared deviation of |laplacian| from its mean.
inline double log_pech_pacheco_of(const RealMatrix& lap, const FundusMask* mask = nullptr) {
  const double mean = mean_abs_laplacian_of(lap, mask);
  double sum = 0.0;
  detail::for_each_index(lap, mask, [&](std::size_t i) {
    const double d = std::abs(lap.data()[i]) - mean;
    sum += d * d;
  });
  if (!(sum > 0.0)) throw DomainError("log_pech_pacheco: zero variance");
  return std::log(sum);
}

inline double log_pech_pacheco(const RealMatrix& img, const FundusMask* mask = nullptr) {
  return log_pech_pacheco_of(laplacian(img), mask);
}

/// Threshold policy for the thresholded Tenengrad column.
struct TauPolicy {
  enum class Kind { kPercentile, kFixed };
  Kind kind = Kind::kPercentile;
  double value = 0.75;  // quantile in [0,1] or absolute magnitude
};

inline GradFeatures grad_features(const GradientField& g, const RealMatrix& lap,
                                  TauPolicy tau = {}, const FundusMask* mask = nullptr) {
  GradFeatures f;
  f.tenengrad = tenengrad(g, mask);
  const double t =
      tau.kind == TauPolicy::Kind::kPercentile ? adaptive_tau(g, tau.value, mask) : tau.value;
  f.tenengrad_thresholded = tenengrad_thresholded(g, t, mask);
  f.mean_abs_laplacian = mean_abs_laplacian_of(lap, mask);
  f.energy_laplacian = energy_laplacian_of(lap, mask);
  f.log_pech_pacheco = log_pech_pacheco_of(lap, mask);
  return f;
}

inline GradFeatures grad_features(const RealMatrix& img, TauPolicy tau = {},
                                  const FundusMask* mask = nullptr) {
  return grad_features(sobel_magnitude(img), laplacian(img), tau, mask);
}

}  // namespace fundusq
