#include "camsel/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "camsel/error.hpp"

namespace camsel {

namespace {

constexpr std::uint8_t kBackground = 128;
constexpr int kDarkBase = 0;
constexpr int kBrightBase = 168;
constexpr int kBandWidth = 88;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t seed, int camera, int window, int layer) {
  return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(camera)) ^ (static_cast<std::uint64_t>(window) << 8 | layer));
}

struct Blob {
  int x, y, w, h;
  std::uint8_t value;
};

struct Layer {
  int shift_x = 0, shift_y = 0;
  int origin_x = 0, origin_y = 0;  // canvas position viewed by the first frame of the window
  std::vector<Blob> blobs;
};

std::vector<Layer> build_layers(const SceneSpec& spec, int camera, int window) {
  const double density = spec.densities()[camera][window];
  const int span = spec.window_length - 1;
  const int far_x = static_cast<int>(spec.shift_x * spec.parallax);
  const int far_y = static_cast<int>(spec.shift_y * spec.parallax);
  const std::array<std::array<int, 2>, 2> shifts{{{far_x, far_y}, {spec.shift_x, spec.shift_y}}};

  std::vector<Layer> layers;
  for (int l = 0; l < 2; ++l) {
    Layer layer;
    layer.shift_x = shifts[l][0];
    layer.shift_y = shifts[l][1];
    const int extra_x = span * std::abs(layer.shift_x);
    const int extra_y = span * std::abs(layer.shift_y);
    layer.origin_x = layer.shift_x < 0 ? extra_x : 0;
    layer.origin_y = layer.shift_y < 0 ? extra_y : 0;
    const int canvas_w = spec.width + extra_x;
    const int canvas_h = spec.height + extra_y;
    const double area_ratio = static_cast<double>(canvas_w) * canvas_h / (static_cast<double>(spec.width) * spec.height);
    const auto count = static_cast<int>(std::lround(density * spec.blobs_at_full_density * area_ratio / 2.0));

    std::mt19937_64 rng(cell_seed(spec.seed, camera, window, l));
    std::uniform_int_distribution<int> size(spec.min_blob, spec.max_blob);
    std::uniform_int_distribution<int> px(-spec.max_blob, canvas_w - 1);
    std::uniform_int_distribution<int> py(-spec.max_blob, canvas_h - 1);
    layer.blobs.reserve(count);
    for (int i = 0; i < count; ++i) {
      Blob b;
      b.w = size(rng);
      b.h = size(rng);
      b.x = px(rng);
      b.y = py(rng);
      // Binary polarity; the level within each polarity band varies so corners stay distinctive.
      const int level = static_cast<int>(rng() % kBandWidth);
      b.value = static_cast<std::uint8_t>((rng() & 1u) ? kBrightBase + level : kDarkBase + level);
      layer.blobs.push_back(b);
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

GrayImage render_layers(const SceneSpec& spec, const std::vector<Layer>& layers, int local_frame) {
  GrayImage img(spec.width, spec.height, kBackground);
  for (const Layer& layer : layers) {
    const int ox = layer.origin_x + local_frame * layer.shift_x;
    const int oy = layer.origin_y + local_frame * layer.shift_y;
    for (const Blob& b : layer.blobs) {
      const int x0 = std::max(b.x - ox, 0), x1 = std::min(b.x - ox + b.w, spec.width);
      const int y0 = std::max(b.y - oy, 0), y1 = std::min(b.y - oy + b.h, spec.height);
      if (x0 >= x1 || y0 >= y1) continue;
      img.pixels().block(y0, x0, y1 - y0, x1 - x0).setConstant(b.value);
    }
  }
  return img;
}

}  // namespace

void SceneSpec::validate() const {
  if (num_cameras < 1) throw InvalidSpec("num_cameras must be positive");
  if (frames_per_camera < 1) throw InvalidSpec("frames_per_camera must be positive");
  if (!(fps > 0.0)) throw InvalidSpec("fps must be positive");
  if (width < kMinExtractSide || height < kMinExtractSide) throw InvalidSpec("resolution too small");
  if (window_length < 1) throw InvalidSpec("window_length must be positive");
  if (min_blob < 1 || max_blob < min_blob) throw InvalidSpec("bad blob size range");
  if (blobs_at_full_density < 0) throw InvalidSpec("blobs_at_full_density must be non-negative");
  if (parallax < 0.0 || parallax > 1.0) throw InvalidSpec("parallax must be in [0, 1]");
  const double overlap = static_cast<double>(width - std::abs(shift_x)) * (height - std::abs(shift_y)) /
                         (static_cast<double>(width) * height);
  if (std::abs(shift_x) >= width || std::abs(shift_y) >= height || overlap < 0.5)
    throw InvalidSpec("per-frame shift leaves less than 50% overlap between consecutive frames");
  const auto in_unit = [](double d) { return d >= 0.0 && d <= 1.0; };
  switch (schedule.kind) {
    case DensitySchedule::Kind::Rotating:
      if (!in_unit(schedule.rich) || !in_unit(schedule.poor)) throw InvalidSpec("densities must lie in [0, 1]");
      break;
    case DensitySchedule::Kind::Balanced:
      if (schedule.rich_levels.empty() || schedule.poor_levels.empty())
        throw InvalidSpec("balanced schedule needs rich and poor levels");
      for (double d : schedule.rich_levels)
        if (!in_unit(d)) throw InvalidSpec("densities must lie in [0, 1]");
      for (double d : schedule.poor_levels)
        if (!in_unit(d)) throw InvalidSpec("densities must lie in [0, 1]");
      break;
    case DensitySchedule::Kind::Explicit:
      if (static_cast<int>(schedule.densities.size()) != num_cameras)
        throw InvalidSpec("explicit schedule needs one row per camera");
      for (const auto& row : schedule.densities) {
        if (static_cast<int>(row.size()) != num_windows()) throw InvalidSpec("explicit schedule needs one entry per window");
        for (double d : row)
          if (!in_unit(d)) throw InvalidSpec("densities must lie in [0, 1]");
      }
      break;
  }
}

int SceneSpec::num_windows() const { return (frames_per_camera + window_length - 1) / window_length; }

std::int64_t SceneSpec::period_ns() const { return std::llround(1e9 / fps); }

std::vector<std::vector<double>> SceneSpec::densities() const {
  const int windows = num_windows();
  std::vector<std::vector<double>> d(num_cameras, std::vector<double>(windows, 0.0));
  switch (schedule.kind) {
    case DensitySchedule::Kind::Rotating:
      for (int c = 0; c < num_cameras; ++c)
        for (int w = 0; w < windows; ++w) d[c][w] = (w % num_cameras == c) ? schedule.rich : schedule.poor;
      break;
    case DensitySchedule::Kind::Balanced: {
      std::mt19937_64 rng(mix(seed ^ 0x5ca1ab1eull));
      std::vector<int> order(static_cast<std::size_t>(num_cameras));
      std::vector<int> times_rich(static_cast<std::size_t>(num_cameras), 0);
      for (int w = 0; w < windows; ++w) {
        std::iota(order.begin(), order.end(), 0);
        for (int i = num_cameras - 1; i > 0; --i) std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);
        // Cameras that have been rich least often go first, so every camera
        // alternates between both classes.
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return times_rich[a] < times_rich[b]; });
        int rich_count = num_cameras / 2;
        if (num_cameras % 2 == 1 && (rng() & 1u)) ++rich_count;
        for (int i = 0; i < num_cameras; ++i) {
          const auto& levels = i < rich_count ? schedule.rich_levels : schedule.poor_levels;
          d[order[i]][w] = levels[rng() % levels.size()];
          if (i < rich_count) ++times_rich[order[i]];
        }
      }
      break;
    }
    case DensitySchedule::Kind::Explicit:
      d = schedule.densities;
      break;
  }
  return d;
}

double SceneSpec::density(int camera, int frame) const { return densities()[camera][frame / window_length]; }

GrayImage render_frame(const SceneSpec& spec, int camera, int frame) {
  spec.validate();
  if (camera < 0 || camera >= spec.num_cameras || frame < 0 || frame >= spec.frames_per_camera)
    throw InvalidArgument("camera or frame index out of range");
  const int window = frame / spec.window_length;
  return render_layers(spec, build_layers(spec, camera, window), frame % spec.window_length);
}

GeneratedSequence generate_sequence(const SceneSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  const auto densities = spec.densities();
  GeneratedSequence out;
  for (int c = 0; c < spec.num_cameras; ++c) {
    const std::string rel_dir = "seq" + std::to_string(spec.sequence) + "/cam" + std::to_string(c);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / rel_dir, ec);
    if (ec) throw IoError("cannot create " + (out_dir / rel_dir).string() + ": " + ec.message());
    std::vector<Layer> layers;
    for (int f = 0; f < spec.frames_per_camera; ++f) {
      const int window = f / spec.window_length;
      if (f % spec.window_length == 0) layers = build_layers(spec, c, window);
      char name[32];
      std::snprintf(name, sizeof(name), "%06d.png", f);
      const std::string rel = rel_dir + "/" + name;
      write_png(render_layers(spec, layers, f % spec.window_length), out_dir / rel);
      out.manifest.push_back({spec.sequence, c, f * spec.period_ns(), rel});
      out.ground_truth.push_back({spec.sequence, c, f, densities[c][window], spec.shift_x, spec.shift_y});
    }
  }
  return out;
}

GeneratedSequence generate_dataset(const std::vector<SceneSpec>& specs, const std::filesystem::path& out_dir) {
  GeneratedSequence all;
  for (const SceneSpec& spec : specs) {
    auto seq = generate_sequence(spec, out_dir);
    all.manifest.insert(all.manifest.end(), seq.manifest.begin(), seq.manifest.end());
    all.ground_truth.insert(all.ground_truth.end(), seq.ground_truth.begin(), seq.ground_truth.end());
  }
  write_manifest(all.manifest, out_dir / "manifest.csv");
  write_ground_truth(all.ground_truth, out_dir / "groundtruth.csv");
  return all;
}

void write_ground_truth(const std::vector<GroundTruthRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sequence,camera_id,frame,density,shift_x,shift_y\n";
  for (const auto& r : records) {
    char density[32];
    std::snprintf(density, sizeof(density), "%.4f", r.density);
    out << r.sequence << ',' << r.camera_id << ',' << r.frame << ',' << density << ',' << r.shift_x << ','
        << r.shift_y << '\n';
  }
}

void DatasetPlan::validate() const {
  std::vector<int> all(train_sequences);
  all.insert(all.end(), eval_sequences.begin(), eval_sequences.end());
  all.push_back(arbitration_sequence);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw InvalidSpec("dataset plan reuses a sequence number");
  if (all.front() < 0) throw InvalidSpec("sequence numbers must be non-negative");
}

std::vector<SceneSpec> plan_scenes(const SceneSpec& base, const DatasetPlan& plan) {
  plan.validate();
  std::vector<SceneSpec> scenes;
  auto make = [&](int sequence, bool balanced) {
    SceneSpec s = base;
    s.sequence = sequence;
    s.seed = mix(base.seed * 1000003ull + static_cast<std::uint64_t>(sequence));
    if (balanced) s.schedule.kind = DensitySchedule::Kind::Balanced;
    s.validate();
    scenes.push_back(std::move(s));
  };
  std::vector<int> balanced(plan.eval_sequences);
  balanced.insert(balanced.end(), plan.train_sequences.begin(), plan.train_sequences.end());
  std::sort(balanced.begin(), balanced.end());
  for (int seq : balanced) make(seq, true);
  make(plan.arbitration_sequence, false);
  return scenes;
}

double expected_good_count(double density) {
  // Mean good count over 30 in-window pairs per level (6 seeds), default
  // oracle and scene settings.
  static constexpr std::array<std::pair<double, double>, 13> kLadder{{
      {0.00, 0.0},   {0.05, 39.1},  {0.10, 76.4},  {0.15, 112.6}, {0.20, 139.3}, {0.30, 193.4}, {0.40, 262.4},
      {0.50, 323.4}, {0.60, 381.9}, {0.70, 434.6}, {0.80, 450.0}, {0.90, 452.9}, {1.00, 467.2},
  }};
  const double d = std::clamp(density, 0.0, 1.0);
  for (std::size_t i = 1; i < kLadder.size(); ++i) {
    const auto [x0, y0] = kLadder[i - 1];
    const auto [x1, y1] = kLadder[i];
    if (d <= x1) return y0 + (y1 - y0) * (d - x0) / (x1 - x0);
  }
  return kLadder.back().second;
}

double expected_mean_good_count(const SceneSpec& spec) {
  const auto dens = spec.densities();
  double total = 0.0;
  long pairs = 0;
  for (int c = 0; c < spec.num_cameras; ++c) {
    for (int f = 0; f + 1 < spec.frames_per_camera; ++f, ++pairs) {
      // A pair straddling a window boundary sees two unrelated scenes.
      if ((f + 1) % spec.window_length != 0) total += expected_good_count(dens[c][f / spec.window_length]);
    }
  }
  return pairs ? total / static_cast<double>(pairs) : 0.0;
}

}  // namespace camsel
