#include "camsel/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

#include "camsel/error.hpp"

namespace camsel {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) {
  if (width < 0 || height < 0) throw InvalidArgument("negative image size");
  pixels_.setConstant(height, width, fill);
}

namespace {

struct Tap {
  int src;
  float weight;
};

// For each destination index, the source indices it covers and their
// fractional weights (normalised to sum to one).
std::vector<std::vector<Tap>> area_taps(int dst_size, double ratio, int src_size) {
  std::vector<std::vector<Tap>> taps(dst_size);
  for (int i = 0; i < dst_size; ++i) {
    const double lo = i * ratio;
    const double hi = std::min((i + 1) * ratio, static_cast<double>(src_size));
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(static_cast<int>(std::ceil(hi)), src_size);
    double total = 0.0;
    for (int j = first; j < last; ++j) {
      const double overlap = std::min<double>(j + 1, hi) - std::max<double>(j, lo);
      if (overlap <= 1e-12) continue;
      taps[i].push_back({j, static_cast<float>(overlap)});
      total += overlap;
    }
    for (auto& t : taps[i]) t.weight = static_cast<float>(t.weight / total);
  }
  return taps;
}

}  // namespace

RasterX<float> resize_area(const GrayImage& src, int dst_width, int dst_height,
                           double ratio_x, double ratio_y) {
  if (dst_width <= 0 || dst_height <= 0) throw DimensionError("empty resize target");
  if (ratio_x < 1.0 || ratio_y < 1.0) throw InvalidArgument("resize_area only downscales");
  if (dst_width * ratio_x > src.width() + 1e-6 || dst_height * ratio_y > src.height() + 1e-6)
    throw InvalidArgument("resize target exceeds the source extent");

  const auto htaps = area_taps(dst_width, ratio_x, src.width());
  const auto vtaps = area_taps(dst_height, ratio_y, src.height());
  const int rows_used = vtaps.back().back().src + 1;

  RasterX<float> horizontal(rows_used, dst_width);
  for (int y = 0; y < rows_used; ++y) {
    const std::uint8_t* row = src.row(y);
    float* out = horizontal.data() + static_cast<std::ptrdiff_t>(y) * dst_width;
    for (int x = 0; x < dst_width; ++x) {
      float acc = 0.f;
      for (const Tap& t : htaps[x]) acc += t.weight * row[t.src];
      out[x] = acc;
    }
  }

  RasterX<float> result = RasterX<float>::Zero(dst_height, dst_width);
  for (int y = 0; y < dst_height; ++y) {
    for (const Tap& t : vtaps[y]) result.row(y) += t.weight * horizontal.row(t.src);
  }
  return result;
}

RasterX<float> resize_area(const GrayImage& src, int dst_width, int dst_height) {
  return resize_area(src, dst_width, dst_height,
                     static_cast<double>(src.width()) / dst_width,
                     static_cast<double>(src.height()) / dst_height);
}

GrayImage round_to_gray(const RasterX<float>& values) {
  Raster8 out(values.rows(), values.cols());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const float v = std::nearbyint(values.data()[i]);
    out.data()[i] = static_cast<std::uint8_t>(std::clamp(v, 0.f, 255.f));
  }
  return GrayImage(std::move(out));
}

GrayImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw ImageReadError("cannot read image '" + path.string() + "': " + image.message);
  image.format = PNG_FORMAT_GRAY;
  GrayImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageReadError("cannot decode image '" + path.string() + "': " + msg);
  }
  return out;
}

void write_png(const GrayImage& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 1);
  png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height(); ++y)
    png_write_row(png, const_cast<png_bytep>(image.row(y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace camsel
