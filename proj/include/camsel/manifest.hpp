#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace camsel {

/// One captured frame. `path` is relative to the manifest's directory.
struct FrameRecord {
  int sequence = 1;
  int camera_id = 0;
  std::int64_t timestamp_ns = 0;
  std::string path;

  bool operator==(const FrameRecord&) const = default;
};

/// Reads a manifest CSV. The header line is required and must be
/// `camera_id,timestamp_ns,path` optionally followed by `,sequence`
/// (sequence defaults to 1). Throws MissingInput if the file does not exist
/// and ManifestError on malformed content.
std::vector<FrameRecord> read_manifest(const std::filesystem::path& path);

/// Writes the four-column form of the manifest.
void write_manifest(const std::vector<FrameRecord>& records, const std::filesystem::path& path);

/// Groups records by (sequence, camera) keeping file order. Throws
/// ManifestError unless each camera's timestamps strictly increase.
struct CameraStream {
  int sequence = 1;
  int camera_id = 0;
  std::vector<FrameRecord> frames;
};
std::vector<CameraStream> group_streams(const std::vector<FrameRecord>& records);

/// Records of a single sequence.
std::vector<FrameRecord> select_sequence(const std::vector<FrameRecord>& records, int sequence);

}  // namespace camsel
