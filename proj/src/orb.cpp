#include "camsel/orb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "camsel/error.hpp"

namespace camsel {

// --- pyramid ----------------------------------------------------------------

double ImagePyramid::scale(int level) const { return std::pow(scale_factor, level); }

ImagePyramid build_pyramid(const GrayImage& image, int levels, double scale_factor) {
  if (levels < 1) throw InvalidArgument("pyramid needs at least one level");
  if (!(scale_factor > 1.0)) throw InvalidArgument("pyramid scale factor must exceed 1");

  ImagePyramid pyramid;
  pyramid.scale_factor = scale_factor;
  pyramid.levels.reserve(levels);
  for (int i = 0; i < levels; ++i) {
    const double s = pyramid.scale(i);
    const int w = static_cast<int>(std::floor(image.width() / s));
    const int h = static_cast<int>(std::floor(image.height() / s));
    if (w < kMinExtractSide || h < kMinExtractSide) {
      throw DimensionError("pyramid level " + std::to_string(i) + " would be " + std::to_string(w) +
                           "x" + std::to_string(h) + ", below the " +
                           std::to_string(kMinExtractSide) + " px minimum");
    }
    if (i == 0) {
      pyramid.levels.push_back(image);
    } else {
      pyramid.levels.push_back(round_to_gray(resize_area(image, w, h, s, s)));
    }
  }
  return pyramid;
}

void ExtractConfig::validate() const {
  if (max_features < 1) throw InvalidArgument("max_features must be positive");
  if (levels < 1) throw InvalidArgument("levels must be positive");
  if (!(scale_factor > 1.0)) throw InvalidArgument("scale_factor must exceed 1");
  if (fast_threshold < 1 || fast_threshold > 254) throw InvalidArgument("fast_threshold out of range");
  if (border < 16) throw InvalidArgument("border must be at least 16");
  if (grid_cols < 1 || grid_rows < 1) throw InvalidArgument("grid must have at least one cell");
  if (orientation_radius < 1 || orientation_radius > border)
    throw InvalidArgument("orientation radius must fit inside the border");
}

// --- FAST-9 -----------------------------------------------------------------

namespace {

constexpr int kArc = 9;

// True if the 16-bit circular mask has a run of at least kArc set bits.
bool has_arc(unsigned mask) {
  unsigned m = mask | (mask << 16);
  unsigned run = m;
  for (int k = 1; k < kArc; ++k) run &= m >> k;
  return run != 0;
}

// Sum of |diff| over the run of >= kArc set bits in the circular mask.
int arc_sum(unsigned mask, const std::array<int, 16>& absdiff) {
  if (mask == 0xFFFFu) {
    int s = 0;
    for (int d : absdiff) s += d;
    return s;
  }
  int start = 0;
  while (mask & (1u << start)) ++start;  // a clear bit exists
  int best = 0, run_len = 0, run_sum = 0;
  for (int k = 1; k <= 16; ++k) {
    const int i = (start + k) & 15;
    if (mask & (1u << i)) {
      ++run_len;
      run_sum += absdiff[i];
    } else {
      if (run_len >= kArc) best = run_sum;
      run_len = 0;
      run_sum = 0;
    }
  }
  return best;
}

}  // namespace

int fast_score(const GrayImage& image, int x, int y, int threshold) {
  const int c = image(x, y);
  unsigned bright = 0, dark = 0;
  std::array<int, 16> absdiff{};
  for (int i = 0; i < 16; ++i) {
    const int v = image(x + kFastCircle[i][0], y + kFastCircle[i][1]);
    absdiff[i] = std::abs(v - c);
    if (v > c + threshold) bright |= 1u << i;
    else if (v < c - threshold) dark |= 1u << i;
  }
  if (has_arc(bright)) return arc_sum(bright, absdiff);
  if (has_arc(dark)) return arc_sum(dark, absdiff);
  return 0;
}

std::vector<Keypoint> detect_fast(const GrayImage& image, int threshold, int border) {
  if (border < 16) throw InvalidArgument("FAST border must be at least 16");
  const int w = image.width(), h = image.height();
  std::vector<Keypoint> out;
  if (w <= 2 * border || h <= 2 * border) return out;

  std::array<std::ptrdiff_t, 16> offsets{};
  for (int i = 0; i < 16; ++i) offsets[i] = kFastCircle[i][1] * static_cast<std::ptrdiff_t>(w) + kFastCircle[i][0];

  std::vector<int> scores(static_cast<std::size_t>(w) * h, 0);
  for (int y = border; y < h - border; ++y) {
    const std::uint8_t* row = image.row(y);
    int* score_row = scores.data() + static_cast<std::ptrdiff_t>(y) * w;
    for (int x = border; x < w - border; ++x) {
      const std::uint8_t* p = row + x;
      const int c = *p;
      const int hi = c + threshold, lo = c - threshold;
      // Any 9-arc contains two cyclically adjacent compass points.
      const int n = p[offsets[0]], e = p[offsets[4]], s = p[offsets[8]], wv = p[offsets[12]];
      const unsigned b = (n > hi) | ((e > hi) << 1) | ((s > hi) << 2) | ((wv > hi) << 3);
      const unsigned d = (n < lo) | ((e < lo) << 1) | ((s < lo) << 2) | ((wv < lo) << 3);
      const auto adjacent = [](unsigned m) { return (m & ((m >> 1) | (m << 3))) & 0xFu; };
      if (!adjacent(b) && !adjacent(d)) continue;
      score_row[x] = fast_score(image, x, y, threshold);
    }
  }

  for (int y = border; y < h - border; ++y) {
    const int* r0 = scores.data() + static_cast<std::ptrdiff_t>(y - 1) * w;
    const int* r1 = r0 + w;
    const int* r2 = r1 + w;
    for (int x = border; x < w - border; ++x) {
      const int s = r1[x];
      if (s == 0) continue;
      // Ties are resolved in favour of the earlier pixel in raster order.
      if (s <= r0[x - 1] || s <= r0[x] || s <= r0[x + 1] || s <= r1[x - 1]) continue;
      if (s < r1[x + 1] || s < r2[x - 1] || s < r2[x] || s < r2[x + 1]) continue;
      Keypoint kp;
      kp.x = static_cast<float>(x);
      kp.y = static_cast<float>(y);
      kp.response = static_cast<float>(s);
      out.push_back(kp);
    }
  }
  return out;
}

// --- orientation --------------------------------------------------------------

float compute_orientation(const GrayImage& image, const Keypoint& kp, int radius) {
  const int cx = static_cast<int>(std::lround(kp.x));
  const int cy = static_cast<int>(std::lround(kp.y));
  if (cx - radius < 0 || cy - radius < 0 || cx + radius >= image.width() || cy + radius >= image.height())
    throw OutOfBoundsError("orientation patch does not fit at (" + std::to_string(cx) + ", " +
                           std::to_string(cy) + ")");
  std::int64_t m10 = 0, m01 = 0;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int span = static_cast<int>(std::floor(std::sqrt(static_cast<double>(radius * radius - dy * dy))));
    const std::uint8_t* row = image.row(cy + dy) + cx;
    std::int64_t row_sum = 0;
    for (int dx = -span; dx <= span; ++dx) {
      m10 += static_cast<std::int64_t>(dx) * row[dx];
      row_sum += row[dx];
    }
    m01 += dy * row_sum;
  }
  if (m10 == 0 && m01 == 0) return 0.f;
  double angle = std::atan2(static_cast<double>(m01), static_cast<double>(m10));
  if (angle < 0) angle += 2 * std::numbers::pi;
  float out = static_cast<float>(angle);
  if (out >= static_cast<float>(2 * std::numbers::pi)) out = 0.f;
  return out;
}

// --- steered BRIEF ------------------------------------------------------------

namespace {

constexpr SamplePair kBasePattern[256] = {
#include "brief_pattern.inc"
};

struct SteeredTables {
  std::array<std::array<SamplePair, 256>, kSteeringBins> bins{};
  int reach = 0;  // max |offset| over all steered points

  SteeredTables() {
    for (int b = 0; b < kSteeringBins; ++b) {
      const double a = b * std::numbers::pi / 6.0;
      const double c = std::cos(a), s = std::sin(a);
      for (int k = 0; k < 256; ++k) {
        const SamplePair& p = kBasePattern[k];
        auto rot = [&](int x, int y) {
          return std::array<int, 2>{static_cast<int>(std::nearbyint(x * c - y * s)),
                                    static_cast<int>(std::nearbyint(x * s + y * c))};
        };
        const auto pp = rot(p[0], p[1]);
        const auto qq = rot(p[2], p[3]);
        bins[b][k] = {pp[0], pp[1], qq[0], qq[1]};
        for (int v : bins[b][k]) reach = std::max(reach, std::abs(v));
      }
    }
  }
};

const SteeredTables& steered_tables() {
  static const SteeredTables tables;
  return tables;
}

}  // namespace

std::span<const SamplePair, 256> brief_pattern() { return std::span<const SamplePair, 256>(kBasePattern, 256); }

std::span<const SamplePair, 256> steered_pattern(int bin) {
  if (bin < 0 || bin >= kSteeringBins) throw InvalidArgument("steering bin out of range");
  return std::span<const SamplePair, 256>(steered_tables().bins[bin]);
}

int steering_bin(float angle) {
  const double step = std::numbers::pi / 6.0;
  const long b = std::lround(static_cast<double>(angle) / step);
  return static_cast<int>(((b % kSteeringBins) + kSteeringBins) % kSteeringBins);
}

Descriptor256 describe_orb(const GrayImage& image, const Keypoint& kp) {
  const int cx = static_cast<int>(std::lround(kp.x));
  const int cy = static_cast<int>(std::lround(kp.y));
  const int reach = std::max(steered_tables().reach, 15);
  if (cx - reach < 0 || cy - reach < 0 || cx + reach >= image.width() || cy + reach >= image.height())
    throw OutOfBoundsError("descriptor patch does not fit at (" + std::to_string(cx) + ", " +
                           std::to_string(cy) + ")");
  const auto pattern = steered_pattern(steering_bin(kp.angle));
  const std::uint8_t* center = image.row(cy) + cx;
  const std::ptrdiff_t stride = image.width();
  Descriptor256 d;
  for (int k = 0; k < 256; ++k) {
    const SamplePair& s = pattern[k];
    const int ip = center[s[1] * stride + s[0]];
    const int iq = center[s[3] * stride + s[2]];
    if (ip < iq) d.words[k >> 6] |= std::uint64_t{1} << (k & 63);
  }
  return d;
}

// --- extraction -----------------------------------------------------------------

namespace {

struct Candidate {
  Keypoint at_level;  // level-frame coordinates
  float x0, y0;       // level-0 coordinates
  int level;
  int cell;
};

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.at_level.response != b.at_level.response) return a.at_level.response > b.at_level.response;
  if (a.level != b.level) return a.level < b.level;
  if (a.at_level.y != b.at_level.y) return a.at_level.y < b.at_level.y;
  return a.at_level.x < b.at_level.x;
}

}  // namespace

FeatureSet extract(const GrayImage& image, const ExtractConfig& cfg, std::string source_frame) {
  cfg.validate();
  const ImagePyramid pyramid = build_pyramid(image, cfg.levels, cfg.scale_factor);

  std::vector<Candidate> candidates;
  for (int level = 0; level < cfg.levels; ++level) {
    const double s = pyramid.scale(level);
    for (const Keypoint& kp : detect_fast(pyramid.levels[level], cfg.fast_threshold, cfg.border)) {
      Candidate c{kp, static_cast<float>(kp.x * s), static_cast<float>(kp.y * s), level, 0};
      const int gx = std::min(static_cast<int>(c.x0 * cfg.grid_cols / image.width()), cfg.grid_cols - 1);
      const int gy = std::min(static_cast<int>(c.y0 * cfg.grid_rows / image.height()), cfg.grid_rows - 1);
      c.cell = gy * cfg.grid_cols + gx;
      candidates.push_back(c);
    }
  }
  std::sort(candidates.begin(), candidates.end(), ranks_before);

  // Per-cell quota first, then refill the remainder globally by response.
  const int cells = cfg.grid_cols * cfg.grid_rows;
  const int quota = cfg.max_features / cells;
  std::vector<int> per_cell(cells, 0);
  std::vector<char> taken(candidates.size(), 0);
  int kept = 0;
  for (std::size_t i = 0; i < candidates.size() && kept < cfg.max_features; ++i) {
    if (per_cell[candidates[i].cell] < quota) {
      ++per_cell[candidates[i].cell];
      taken[i] = 1;
      ++kept;
    }
  }
  for (std::size_t i = 0; i < candidates.size() && kept < cfg.max_features; ++i) {
    if (!taken[i]) {
      taken[i] = 1;
      ++kept;
    }
  }

  FeatureSet out;
  out.source_frame = std::move(source_frame);
  out.keypoints.reserve(kept);
  out.descriptors.reserve(kept);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!taken[i]) continue;
    const Candidate& c = candidates[i];
    const GrayImage& level_image = pyramid.levels[c.level];
    Keypoint local = c.at_level;
    local.angle = compute_orientation(level_image, local, cfg.orientation_radius);
    Keypoint kp;
    kp.x = c.x0;
    kp.y = c.y0;
    kp.level = c.level;
    kp.angle = local.angle;
    kp.response = local.response;
    out.keypoints.push_back(kp);
    out.descriptors.push_back(describe_orb(level_image, local));
  }
  return out;
}

}  // namespace camsel
