#include "camsel/json_io.hpp"

namespace camsel {

JsonReader::JsonReader(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
  if (!j_.is_object()) throw ConfigError(context_ + ": expected an object");
}

void JsonReader::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!seen_.count(it.key())) throw ConfigError(context_ + ": unknown key '" + it.key() + "'");
}

Json to_json(const ExtractConfig& c) {
  return {{"max_features", c.max_features}, {"levels", c.levels},   {"scale_factor", c.scale_factor},
          {"fast_threshold", c.fast_threshold}, {"border", c.border}, {"grid_cols", c.grid_cols},
          {"grid_rows", c.grid_rows},       {"orientation_radius", c.orientation_radius}};
}

void parse(const Json& j, ExtractConfig& c, const std::string& context) {
  JsonReader r(j, context);
  r.get("max_features", c.max_features)
      .get("levels", c.levels)
      .get("scale_factor", c.scale_factor)
      .get("fast_threshold", c.fast_threshold)
      .get("border", c.border)
      .get("grid_cols", c.grid_cols)
      .get("grid_rows", c.grid_rows)
      .get("orientation_radius", c.orientation_radius)
      .finish();
}

Json to_json(const OracleConfig& c) {
  return {{"extract", to_json(c.extract)},
          {"max_match_distance", c.max_match_distance},
          {"ransac_iterations", c.ransac_iterations},
          {"inlier_threshold", c.inlier_threshold},
          {"seed", c.seed}};
}

void parse(const Json& j, OracleConfig& c, const std::string& context) {
  JsonReader r(j, context);
  r.get_with("extract", c.extract, [](const Json& v, ExtractConfig& e, const std::string& ctx) { parse(v, e, ctx); })
      .get("max_match_distance", c.max_match_distance)
      .get("ransac_iterations", c.ransac_iterations)
      .get("inlier_threshold", c.inlier_threshold)
      .get("seed", c.seed)
      .finish();
}

Json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},   {"beta2", c.beta2},
          {"epsilon", c.epsilon},             {"epochs", c.epochs}, {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

void parse(const Json& j, TrainConfig& c, const std::string& context) {
  JsonReader r(j, context);
  r.get("learning_rate", c.learning_rate)
      .get("beta1", c.beta1)
      .get("beta2", c.beta2)
      .get("epsilon", c.epsilon)
      .get("epochs", c.epochs)
      .get("batch_size", c.batch_size)
      .get("seed", c.seed)
      .finish();
}

Json to_json(const ModelSpec& s) {
  Json blocks = Json::array();
  for (const auto& b : s.backbone)
    blocks.push_back({{"channels", b.channels}, {"kernel", b.kernel}, {"stride", b.stride}, {"pool", b.pool}});
  return {{"input_height", s.input_height}, {"input_width", s.input_width}, {"backbone", blocks}, {"head", s.head}};
}

void parse(const Json& j, ModelSpec& s, const std::string& context) {
  JsonReader r(j, context);
  r.get("input_height", s.input_height)
      .get("input_width", s.input_width)
      .get_with("backbone", s.backbone,
                [](const Json& v, std::vector<ConvBlockSpec>& out, const std::string& ctx) {
                  if (!v.is_array()) throw ConfigError(ctx + ": expected an array");
                  out.clear();
                  for (const auto& item : v) {
                    ConvBlockSpec b;
                    JsonReader(item, ctx)
                        .get("channels", b.channels)
                        .get("kernel", b.kernel)
                        .get("stride", b.stride)
                        .get("pool", b.pool)
                        .finish();
                    out.push_back(b);
                  }
                })
      .get("head", s.head)
      .finish();
}

Json to_json(const ArbitrationPolicy& p) { return {{"hysteresis_margin", p.hysteresis_margin}, {"top_k", p.top_k}}; }

void parse(const Json& j, ArbitrationPolicy& p, const std::string& context) {
  JsonReader(j, context).get("hysteresis_margin", p.hysteresis_margin).get("top_k", p.top_k).finish();
}

namespace {

const char* kind_name(DensitySchedule::Kind k) {
  switch (k) {
    case DensitySchedule::Kind::Rotating: return "rotating";
    case DensitySchedule::Kind::Balanced: return "balanced";
    case DensitySchedule::Kind::Explicit: return "explicit";
  }
  return "rotating";
}

}  // namespace

Json to_json(const DensitySchedule& s) {
  return {{"kind", kind_name(s.kind)},         {"rich", s.rich},
          {"poor", s.poor},                    {"rich_levels", s.rich_levels},
          {"poor_levels", s.poor_levels},      {"densities", s.densities}};
}

void parse(const Json& j, DensitySchedule& s, const std::string& context) {
  std::string kind = kind_name(s.kind);
  JsonReader(j, context)
      .get("kind", kind)
      .get("rich", s.rich)
      .get("poor", s.poor)
      .get("rich_levels", s.rich_levels)
      .get("poor_levels", s.poor_levels)
      .get("densities", s.densities)
      .finish();
  if (kind == "rotating") s.kind = DensitySchedule::Kind::Rotating;
  else if (kind == "balanced") s.kind = DensitySchedule::Kind::Balanced;
  else if (kind == "explicit") s.kind = DensitySchedule::Kind::Explicit;
  else throw ConfigError(context + ".kind: unknown schedule '" + kind + "'");
}

Json to_json(const SceneSpec& s) {
  return {{"sequence", s.sequence},
          {"num_cameras", s.num_cameras},
          {"frames_per_camera", s.frames_per_camera},
          {"fps", s.fps},
          {"width", s.width},
          {"height", s.height},
          {"window_length", s.window_length},
          {"schedule", to_json(s.schedule)},
          {"shift_x", s.shift_x},
          {"shift_y", s.shift_y},
          {"parallax", s.parallax},
          {"blobs_at_full_density", s.blobs_at_full_density},
          {"min_blob", s.min_blob},
          {"max_blob", s.max_blob},
          {"seed", s.seed}};
}

void parse(const Json& j, SceneSpec& s, const std::string& context) {
  JsonReader(j, context)
      .get("sequence", s.sequence)
      .get("num_cameras", s.num_cameras)
      .get("frames_per_camera", s.frames_per_camera)
      .get("fps", s.fps)
      .get("width", s.width)
      .get("height", s.height)
      .get("window_length", s.window_length)
      .get_with("schedule", s.schedule,
                [](const Json& v, DensitySchedule& out, const std::string& ctx) { parse(v, out, ctx); })
      .get("shift_x", s.shift_x)
      .get("shift_y", s.shift_y)
      .get("parallax", s.parallax)
      .get("blobs_at_full_density", s.blobs_at_full_density)
      .get("min_blob", s.min_blob)
      .get("max_blob", s.max_blob)
      .get("seed", s.seed)
      .finish();
}

Json to_json(const BenchConfig& c) {
  return {{"warmup", c.warmup}, {"iterations", c.iterations}, {"parallel_extraction", c.parallel_extraction}};
}

void parse(const Json& j, BenchConfig& c, const std::string& context) {
  JsonReader(j, context)
      .get("warmup", c.warmup)
      .get("iterations", c.iterations)
      .get("parallel_extraction", c.parallel_extraction)
      .finish();
}

}  // namespace camsel
