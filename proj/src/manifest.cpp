#include "camsel/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "camsel/error.hpp"

namespace camsel {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_int(const std::string& text, const std::string& what, int line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ManifestError("line " + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
  return value;
}

}  // namespace

std::vector<FrameRecord> read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("manifest not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ManifestError("manifest is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  const bool has_sequence = header.size() == 4 && header[3] == "sequence";
  if (header.size() < 3 || header[0] != "camera_id" || header[1] != "timestamp_ns" || header[2] != "path" ||
      (header.size() == 4 && !has_sequence) || header.size() > 4)
    throw ManifestError("manifest header must be camera_id,timestamp_ns,path[,sequence]");

  std::vector<FrameRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ManifestError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields");
    FrameRecord r;
    r.camera_id = parse_int<int>(fields[0], "camera_id", line_no);
    r.timestamp_ns = parse_int<std::int64_t>(fields[1], "timestamp_ns", line_no);
    r.path = fields[2];
    if (r.path.empty()) throw ManifestError("line " + std::to_string(line_no) + ": empty path");
    if (has_sequence) r.sequence = parse_int<int>(fields[3], "sequence", line_no);
    if (r.camera_id < 0) throw ManifestError("line " + std::to_string(line_no) + ": negative camera_id");
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const std::vector<FrameRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "camera_id,timestamp_ns,path,sequence\n";
  for (const auto& r : records) out << r.camera_id << ',' << r.timestamp_ns << ',' << r.path << ',' << r.sequence << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<CameraStream> group_streams(const std::vector<FrameRecord>& records) {
  std::map<std::pair<int, int>, std::vector<FrameRecord>> groups;
  for (const auto& r : records) groups[{r.sequence, r.camera_id}].push_back(r);
  std::vector<CameraStream> streams;
  for (auto& [key, frames] : groups) {
    for (std::size_t i = 1; i < frames.size(); ++i) {
      if (frames[i].timestamp_ns <= frames[i - 1].timestamp_ns)
        throw ManifestError("sequence " + std::to_string(key.first) + " camera " + std::to_string(key.second) +
                            ": timestamps not strictly increasing at " + frames[i].path);
    }
    streams.push_back({key.first, key.second, std::move(frames)});
  }
  return streams;
}

std::vector<FrameRecord> select_sequence(const std::vector<FrameRecord>& records, int sequence) {
  std::vector<FrameRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const FrameRecord& r) { return r.sequence == sequence; });
  return out;
}

}  // namespace camsel
