#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

#include "camsel/error.hpp"

namespace camsel {

using Raster8 = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RasterX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Smallest side accepted by feature extraction (the 31x31 BRIEF patch must fit).
inline constexpr int kMinExtractSide = 32;

// 8-bit grayscale raster, row-major. Pixel (x, y) lives at row y, column x.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  explicit GrayImage(Raster8 pixels) : pixels_(std::move(pixels)) {}

  int width() const { return static_cast<int>(pixels_.cols()); }
  int height() const { return static_cast<int>(pixels_.rows()); }
  bool empty() const { return pixels_.size() == 0; }

  std::uint8_t operator()(int x, int y) const { return pixels_(y, x); }
  std::uint8_t& operator()(int x, int y) { return pixels_(y, x); }

  const std::uint8_t* data() const { return pixels_.data(); }
  std::uint8_t* data() { return pixels_.data(); }
  const std::uint8_t* row(int y) const { return pixels_.data() + static_cast<std::ptrdiff_t>(y) * width(); }

  const Raster8& pixels() const { return pixels_; }
  Raster8& pixels() { return pixels_; }

  bool operator==(const GrayImage& other) const {
    return width() == other.width() && height() == other.height() && pixels_ == other.pixels_;
  }

 private:
  Raster8 pixels_;
};

// Area-weighted downscale. Each destination pixel averages the source
// rectangle [x*ratio_x, (x+1)*ratio_x) x [y*ratio_y, (y+1)*ratio_y) with
// fractional coverage weights. Ratios must be >= 1 and the covered span must
// fit inside the source.
RasterX<float> resize_area(const GrayImage& src, int dst_width, int dst_height,
                           double ratio_x, double ratio_y);

// Convenience overload mapping the whole source onto the destination.
RasterX<float> resize_area(const GrayImage& src, int dst_width, int dst_height);

GrayImage round_to_gray(const RasterX<float>& values);

// 8-bit grayscale PNG I/O. Color inputs are converted to gray on read.
GrayImage read_png(const std::filesystem::path& path);
void write_png(const GrayImage& image, const std::filesystem::path& path);

}  // namespace camsel
