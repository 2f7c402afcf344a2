#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "fundusq/errors.hpp"
#include "fundusq/filter.hpp"
#include "fundusq/matrix.hpp"

namespace fundusq {

namespace detail {

inline void require_unit_range(const RealMatrix& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InvalidArgument(std::string(what) + ": zero-dimension image");
  }
  for (double v : m) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument(std::string(what) + ": intensity outside [0,1]");
    }
  }
}

}  // namespace detail

/// Three intensity planes in [0,1].
class RgbImage {
 public:
  RgbImage(RealMatrix red, RealMatrix green, RealMatrix blue)
      : planes_{std::move(red), std::move(green), std::move(blue)} {
    for (const auto& p : planes_) detail::require_unit_range(p, "RgbImage");
    require_same_shape(planes_[0], planes_[1], "RgbImage");
    require_same_shape(planes_[0], planes_[2], "RgbImage");
  }

  [[nodiscard]] std::size_t width() const noexcept { return planes_[0].cols(); }
  [[nodiscard]] std::size_t height() const noexcept { return planes_[0].rows(); }
  [[nodiscard]] const RealMatrix& channel(std::size_t i) const { return planes_.at(i); }
  [[nodiscard]] const RealMatrix& red() const noexcept { return planes_[0]; }
  [[nodiscard]] const RealMatrix& green() const noexcept { return planes_[1]; }
  [[nodiscard]] const RealMatrix& blue() const noexcept { return planes_[2]; }

 private:
  std::array<RealMatrix, 3> planes_;
};

/// Luminance matrix with every value in [0,1]. Converts implicitly to the
/// underlying RealMatrix so metric functions can take either.
class GrayImage {
 public:
  explicit GrayImage(RealMatrix pixels) : pixels_(std::move(pixels)) {
    detail::require_unit_range(pixels_, "GrayImage");
  }

  [[nodiscard]] std::size_t width() const noexcept { return pixels_.cols(); }
  [[nodiscard]] std::size_t height() const noexcept { return pixels_.rows(); }
  [[nodiscard]] std::size_t rows() const noexcept { return pixels_.rows(); }
  [[nodiscard]] std::size_t cols() const noexcept { return pixels_.cols(); }
  [[nodiscard]] const RealMatrix& pixels() const noexcept { return pixels_; }
  operator const RealMatrix&() const noexcept { return pixels_; }  // NOLINT

 private:
  RealMatrix pixels_;
};

/// Boolean map of the illuminated fundus disc, stored as 0/1 bytes.
class FundusMask {
 public:
  explicit FundusMask(Matrix<std::uint8_t> inside) : inside_(std::move(inside)) {}

  /// Mask with every pixel inside.
  static FundusMask all(std::size_t rows, std::size_t cols) {
    return FundusMask(Matrix<std::uint8_t>(rows, cols, 1));
  }

  [[nodiscard]] std::size_t rows() const noexcept { return inside_.rows(); }
  [[nodiscard]] std::size_t cols() const noexcept { return inside_.cols(); }
  [[nodiscard]] bool operator()(std::size_t r, std::size_t c) const noexcept {
    return inside_(r, c) != 0;
  }
  [[nodiscard]] const Matrix<std::uint8_t>& bits() const noexcept { return inside_; }
  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), 1));
  }

 private:
  Matrix<std::uint8_t> inside_;
};

/// Decodes JPEG/PNG (8 or 16 bit) into [0,1] RGB. Grey inputs are replicated
/// to three channels and any alpha channel is dropped.
inline RgbImage load_image(const std::filesystem::path& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open image: " + path.string());
  }
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw UnsupportedFormatError("cannot decode image: " + path.string());
  if (raw.rows == 0 || raw.cols == 0) throw IoError("zero-dimension image: " + path.string());

  double scale = 0.0;
  switch (raw.depth()) {
    case CV_8U: scale = 255.0; break;
    case CV_16U: scale = 65535.0; break;
    default: throw UnsupportedFormatError("unsupported bit depth: " + path.string());
  }

  const auto rows = static_cast<std::size_t>(raw.rows);
  const auto cols = static_cast<std::size_t>(raw.cols);
  const int ch = raw.channels();
  // OpenCV decodes colour as BGR(A).
  std::array<int, 3> source{};
  switch (ch) {
    case 1:
    case 2: source = {0, 0, 0}; break;
    case 3:
    case 4: source = {2, 1, 0}; break;
    default: throw UnsupportedFormatError("unsupported channel count: " + path.string());
  }

  std::array<RealMatrix, 3> planes{RealMatrix(rows, cols), RealMatrix(rows, cols),
                                   RealMatrix(rows, cols)};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        const auto idx = static_cast<int>(c) * ch + source[k];
        const double v = raw.depth() == CV_8U
                             ? raw.ptr<std::uint8_t>(static_cast<int>(r))[idx]
                             : raw.ptr<std::uint16_t>(static_cast<int>(r))[idx];
        planes[k](r, c) = v / scale;
      }
    }
  }
  return RgbImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]));
}

/// BT.709 luma.
inline GrayImage to_grayscale(const RgbImage& img) {
  constexpr double kR = 0.2125;
  constexpr double kG = 0.7154;
  constexpr double kB = 0.0721;
  RealMatrix gray(img.height(), img.width());
  const auto r = img.red().data();
  const auto g = img.green().data();
  const auto b = img.blue().data();
  auto out = gray.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(kR * r[i] + kG * g[i] + kB * b[i], 0.0, 1.0);
  }
  return GrayImage(std::move(gray));
}

inline constexpr double kDefaultMaskThreshold = 0.05;

/// Foreground where a 5x5 mean-filtered copy of the image exceeds the threshold.
inline FundusMask fundus_mask(const RealMatrix& img, double threshold = kDefaultMaskThreshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("fundus_mask: threshold must lie in (0,1)");
  }
  const RealMatrix smooth = box_blur(img, 2);
  Matrix<std::uint8_t> inside(img.rows(), img.cols());
  bool any = false;
  for (std::size_t i = 0; i < smooth.size(); ++i) {
    const bool in = smooth.data()[i] > threshold;
    inside.data()[i] = in ? 1 : 0;
    any = any || in;
  }
  if (!any) throw DegenerateMaskError("fundus_mask: no pixel above threshold");
  return FundusMask(std::move(inside));
}

/// Writes a matrix as a 16-bit greyscale PNG, min-max stretched to the full
/// range. Constant matrices come out black.
inline void save_png16(const RealMatrix& m, const std::filesystem::path& path) {
  if (m.empty()) throw InvalidArgument("save_png16: empty matrix");
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  const double span = *hi - *lo;
  cv::Mat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), CV_16UC1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto* dst = out.ptr<std::uint16_t>(static_cast<int>(r));
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double t = span > 0.0 ? (m(r, c) - *lo) / span : 0.0;
      dst[c] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
  }
  if (!cv::imwrite(path.string(), out)) throw IoError("cannot write " + path.string());
}

inline void save_png16(const FundusMask& mask, const std::filesystem::path& path) {
  save_png16(map(mask.bits(), [](std::uint8_t b) { return static_cast<double>(b); }), path);
}

}  // namespace fundusq
