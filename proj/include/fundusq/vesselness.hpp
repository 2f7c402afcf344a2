#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fundusq/errors.hpp"
#include "fundusq/filter.hpp"
#include "fundusq/grad_metrics.hpp"
#include "fundusq/image.hpp"
#include "fundusq/matrix.hpp"

namespace fundusq {

/// Multiscale Frangi vesselness settings. `c` is in [0,1] intensity units
/// (15/255 corresponds to the usual c = 15 on 8-bit data).
struct FrangiParams {
  std::vector<double> scales{1.0, 2.0, 4.0, 8.0};
  double beta = 0.5;
  double c = 15.0 / 255.0;
  bool dark_vessels = true;
  /// Integer factor; >1 runs the filter on a block-averaged copy and
  /// upsamples the response.
  std::size_t downscale = 1;

  void validate() const {
    if (scales.empty()) throw InvalidArgument("FrangiParams: empty scale list");
    for (std::size_t i = 0; i < scales.size(); ++i) {
      if (!(scales[i] > 0.0)) throw InvalidArgument("FrangiParams: scales must be positive");
      if (i > 0 && !(scales[i] > scales[i - 1]))
        throw InvalidArgument("FrangiParams: scales must be strictly ascending");
    }
    if (!(beta > 0.0) || !(c > 0.0)) throw InvalidArgument("FrangiParams: beta and c must be > 0");
    if (downscale == 0) throw InvalidArgument("FrangiParams: downscale must be >= 1");
  }
};

/// Frangi response in [0,1], zero outside the fundus mask.
struct VesselnessMap {
  RealMatrix response;
};

struct StructureTensor {
  RealMatrix xx;
  RealMatrix xy;
  RealMatrix yy;
};

/// Non-negative weights concentrated around vessel margins.
struct PerivascularMask {
  RealMatrix weights;
};

/// Tensor components are indexed by image axes (0 = rows, 1 = columns), so the
/// (1,1) entry is the column-derivative term `xx`.
/// kLiteral: sqrt(A01^2 + A11^2 + A10^2) = sqrt(2*Axy^2 + Axx^2).
/// kFrobenius: sqrt(Axx^2 + 2*Axy^2 + Ayy^2).
enum class PerivascularVariant { kLiteral, kFrobenius };

/// Divisor for the weighted means: pixel count, or total mask weight.
enum class WeightNormalisation { kPixelCount, kMaskWeight };

namespace detail {

struct Hessian {
  RealMatrix xx, xy, yy;
};

/// Central second differences of a smoothed image, replicated borders.
inline Hessian hessian_of(const RealMatrix& f) {
  const std::size_t rows = f.rows();
  const std::size_t cols = f.cols();
  Hessian h{RealMatrix(rows, cols), RealMatrix(rows, cols), RealMatrix(rows, cols)};
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t rp = std::min(r + 1, rows - 1);
    const std::size_t rm = r == 0 ? 0 : r - 1;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t cp = std::min(c + 1, cols - 1);
      const std::size_t cm = c == 0 ? 0 : c - 1;
      h.xx(r, c) = f(r, cp) - 2.0 * f(r, c) + f(r, cm);
      h.yy(r, c) = f(rp, c) - 2.0 * f(r, c) + f(rm, c);
      h.xy(r, c) = 0.25 * (f(rp, cp) - f(rp, cm) - f(rm, cp) + f(rm, cm));
    }
  }
  return h;
}

/// Raw (unnormalised) maximum-over-scales Frangi response.
inline RealMatrix frangi_raw(const RealMatrix& img, const FrangiParams& p,
                             double scale_divisor) {
  RealMatrix best(img.rows(), img.cols(), 0.0);
  const double two_beta_sq = 2.0 * p.beta * p.beta;
  const double two_c_sq = 2.0 * p.c * p.c;
  for (const double scale : p.scales) {
    const double sigma = std::max(scale / scale_divisor, 0.5);
    const Hessian h = hessian_of(gaussian_blur(img, sigma));
    const double norm = sigma * sigma;
    for (std::size_t i = 0; i < best.size(); ++i) {
      const double a = norm * h.xx.data()[i];
      const double b = norm * h.xy.data()[i];
      const double d = norm * h.yy.data()[i];
      const double mid = 0.5 * (a + d);
      const double rad = std::hypot(0.5 * (a - d), b);
      double l1 = mid + rad;
      double l2 = mid - rad;
      if (std::abs(l1) > std::abs(l2)) std::swap(l1, l2);
      if (l2 == 0.0) continue;
      if (p.dark_vessels ? l2 < 0.0 : l2 > 0.0) continue;
      const double rb = l1 / l2;
      const double s_sq = l1 * l1 + l2 * l2;
      const double v = std::exp(-rb * rb / two_beta_sq) * (1.0 - std::exp(-s_sq / two_c_sq));
      best.data()[i] = std::max(best.data()[i], v);
    }
  }
  return best;
}

}  // namespace detail

/// Multiscale vessel enhancement. Per scale: Gaussian smoothing, sigma^2
/// normalised Hessian, eigenvalues ordered |l1| <= |l2|, then
/// exp(-Rb^2/2beta^2) * (1 - exp(-S^2/2c^2)) with Rb = l1/l2 and
/// S = |(l1,l2)|. Pixels whose l2 has the wrong sign for the vessel polarity
/// score zero. The maximum over scales is rescaled so that the largest
/// in-mask value is 1, and everything outside the mask is zeroed.
inline VesselnessMap frangi(const RealMatrix& img, const FrangiParams& params,
                           const FundusMask& mask) {
  params.validate();
  require_same_shape(img, mask, "frangi");
  RealMatrix raw;
  if (params.downscale > 1) {
    const RealMatrix small = downscale(img, params.downscale);
    raw = resize_bilinear(detail::frangi_raw(small, params, static_cast<double>(params.downscale)),
                          img.rows(), img.cols());
  } else {
    raw = detail::frangi_raw(img, params, 1.0);
  }

  double peak = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (mask.bits().data()[i] != 0) peak = std::max(peak, raw.data()[i]);
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& v = raw.data()[i];
    v = (mask.bits().data()[i] != 0 && peak > 0.0) ? std::clamp(v / peak, 0.0, 1.0) : 0.0;
  }
  return {std::move(raw)};
}

/// Gaussian-smoothed outer product of the Sobel gradient.
inline StructureTensor structure_tensor(const RealMatrix& field, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("structure_tensor: sigma must be positive");
  const RealMatrix gx = convolve2d(field, sobel_x_kernel());
  const RealMatrix gy = convolve2d(field, sobel_y_kernel());
  RealMatrix xx(field.rows(), field.cols());
  RealMatrix xy(field.rows(), field.cols());
  RealMatrix yy(field.rows(), field.cols());
  for (std::size_t i = 0; i < xx.size(); ++i) {
    const double dx = gx.data()[i];
    const double dy = gy.data()[i];
    xx.data()[i] = dx * dx;
    xy.data()[i] = dx * dy;
    yy.data()[i] = dy * dy;
  }
  return {gaussian_blur(xx, sigma), gaussian_blur(xy, sigma), gaussian_blur(yy, sigma)};
}

inline PerivascularMask perivascular_mask(const VesselnessMap& vmap,
                                          PerivascularVariant variant = PerivascularVariant::kLiteral) {
  const StructureTensor st = structure_tensor(vmap.response, 1.0);
  RealMatrix w(st.xx.rows(), st.xx.cols());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double xx = st.xx.data()[i];
    const double xy = st.xy.data()[i];
    const double yy = st.yy.data()[i];
    double sq = 2.0 * xy * xy + xx * xx;
    if (variant == PerivascularVariant::kFrobenius) sq += yy * yy;
    w.data()[i] = std::sqrt(sq);
  }
  return {std::move(w)};
}

namespace detail {

template <typename F>
double weighted_mean(const PerivascularMask& pmask, const RealMatrix& values,
                     WeightNormalisation norm, F&& term, const char* what) {
  require_same_shape(pmask.weights, values, what);
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = pmask.weights.data()[i];
    sum += w * term(values.data()[i]);
    weight += w;
  }
  if (norm == WeightNormalisation::kPixelCount) return sum / static_cast<double>(values.size());
  if (!(weight > 0.0)) throw DomainError(std::string(what) + ": mask has zero total weight");
  return sum / weight;
}

}  // namespace detail

/// Mean over pixels of V'(m,n) * G(m,n)^2.
inline double perivascular_tenengrad(const GradientField& g, const PerivascularMask& pmask,
                                     WeightNormalisation norm = WeightNormalisation::kPixelCount) {
  return detail::weighted_mean(
      pmask, g.magnitude, norm, [](double v) { return v * v; }, "perivascular_tenengrad");
}

inline double perivascular_tenengrad(const RealMatrix& img, const PerivascularMask& pmask,
                                     WeightNormalisation norm = WeightNormalisation::kPixelCount) {
  return perivascular_tenengrad(sobel_magnitude(img), pmask, norm);
}

/// Mean over pixels of V'(m,n) * |laplacian(m,n)|; takes the Laplacian itself.
inline double perivascular_abs_laplacian_of(const RealMatrix& lap, const PerivascularMask& pmask,
                                            WeightNormalisation norm = WeightNormalisation::kPixelCount) {
  return detail::weighted_mean(
      pmask, lap, norm, [](double v) { return std::abs(v); }, "perivascular_abs_laplacian");
}

inline double perivascular_abs_laplacian(const RealMatrix& img, const PerivascularMask& pmask,
                                         WeightNormalisation norm = WeightNormalisation::kPixelCount) {
  return perivascular_abs_laplacian_of(laplacian(img), pmask, norm);
}

}  // namespace fundusq
