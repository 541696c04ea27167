#pragma once

#include <filesystem>

#include "camsel/network.hpp"

namespace camsel {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, little-endian throughout:
///   "CAMSELNN"  u32 version  u32 n  <n bytes of model-spec JSON>
///   u32 layer count, then per layer:
///     u32 n  <name>  and for weight, bias: u32 rank  u32 dims[rank]  f32 data[]
void save_checkpoint(const ModelParams<float>& model, const std::filesystem::path& path);
ModelParams<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace camsel
