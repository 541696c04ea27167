#include "camsel/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "camsel/json_io.hpp"

namespace camsel {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'A', 'M', 'S', 'E', 'L', 'N', 'N'};

void put_u32(std::string& buf, std::uint32_t v) { buf.append(reinterpret_cast<const char*>(&v), sizeof v); }

void put_tensor(std::string& buf, const Tensor<float>& t) {
  put_u32(buf, static_cast<std::uint32_t>(t.rank()));
  for (int d : t.shape()) put_u32(buf, static_cast<std::uint32_t>(d));
  buf.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
}

class Cursor {
 public:
  explicit Cursor(const std::string& data) : data_(data) {}

  const char* take(std::size_t n) {
    if (n > data_.size() - pos_) throw CorruptCheckpoint("truncated checkpoint");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    return {take(n), n};
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

Tensor<float> get_tensor(Cursor& in, const std::vector<int>& expected, const std::string& what) {
  const std::uint32_t rank = in.u32();
  if (rank > 8) throw CorruptCheckpoint(what + ": implausible rank " + std::to_string(rank));
  std::vector<int> shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<int>(in.u32()));
  if (shape != expected)
    throw CorruptCheckpoint(what + ": declared shape " + shape_string(shape) + " but the spec needs " +
                            shape_string(expected));
  Tensor<float> t(shape);
  std::memcpy(t.data(), in.take(t.size() * sizeof(float)), t.size() * sizeof(float));
  return t;
}

}  // namespace

void save_checkpoint(const ModelParams<float>& model, const std::filesystem::path& path) {
  std::string buf(kMagic, sizeof kMagic);
  put_u32(buf, kCheckpointVersion);
  const std::string spec = to_json(model.spec).dump();
  put_u32(buf, static_cast<std::uint32_t>(spec.size()));
  buf += spec;
  put_u32(buf, static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    put_u32(buf, static_cast<std::uint32_t>(l.name.size()));
    buf += l.name;
    put_tensor(buf, l.weight);
    put_tensor(buf, l.bias);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("checkpoint not found: " + path.string());
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  Cursor in(data);
  if (std::memcmp(in.take(sizeof kMagic), kMagic, sizeof kMagic) != 0) throw CorruptCheckpoint("bad magic bytes");
  if (const auto v = in.u32(); v != kCheckpointVersion)
    throw CorruptCheckpoint("unsupported checkpoint version " + std::to_string(v));

  ModelParams<float> model;
  try {
    parse(Json::parse(in.str()), model.spec);
    model.spec.validate();
  } catch (const CorruptCheckpoint&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptCheckpoint(std::string("bad model spec: ") + e.what());
  }
  const auto shapes = layer_shapes(model.spec);
  if (in.u32() != shapes.size()) throw CorruptCheckpoint("layer count does not match the model spec");
  for (const auto& s : shapes) {
    Layer<float> l;
    l.name = in.str();
    if (l.name != s.name) throw CorruptCheckpoint("expected layer " + s.name + ", found " + l.name);
    l.weight = get_tensor(in, s.weight, "layer " + s.name + " weight");
    l.bias = get_tensor(in, s.bias, "layer " + s.name + " bias");
    model.layers.push_back(std::move(l));
  }
  if (!in.done()) throw CorruptCheckpoint("trailing bytes after the last layer");
  return model;
}

}  // namespace camsel
