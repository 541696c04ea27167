#pragma once

#include <set>
#include <string>

#include "json.hpp"

#include "camsel/arbitration.hpp"
#include "camsel/bench.hpp"
#include "camsel/error.hpp"
#include "camsel/network.hpp"
#include "camsel/oracle.hpp"
#include "camsel/orb.hpp"
#include "camsel/synth.hpp"
#include "camsel/train.hpp"

namespace camsel {

using Json = nlohmann::ordered_json;

/// Reads fields from a JSON object, keeping defaults for missing keys and
/// rejecting keys nobody asked for.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string context);

  template <typename T>
  JsonReader& get(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->template get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(context_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  template <typename T, typename Fn>
  JsonReader& get_with(const char* key, T& out, Fn&& parse) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) parse(*it, out, context_ + "." + key);
    return *this;
  }

  /// Throws ConfigError on unknown keys.
  void finish() const;

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

Json to_json(const ExtractConfig& c);
Json to_json(const OracleConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const ModelSpec& s);
Json to_json(const ArbitrationPolicy& p);
Json to_json(const DensitySchedule& s);
Json to_json(const SceneSpec& s);
Json to_json(const BenchConfig& c);

void parse(const Json& j, ExtractConfig& c, const std::string& context = "extract");
void parse(const Json& j, OracleConfig& c, const std::string& context = "oracle");
void parse(const Json& j, TrainConfig& c, const std::string& context = "train");
void parse(const Json& j, ModelSpec& s, const std::string& context = "model");
void parse(const Json& j, ArbitrationPolicy& p, const std::string& context = "policy");
void parse(const Json& j, DensitySchedule& s, const std::string& context = "schedule");
void parse(const Json& j, SceneSpec& s, const std::string& context = "scene");
void parse(const Json& j, BenchConfig& c, const std::string& context = "bench");

}  // namespace camsel
