#include "saqa/safz.hpp"

#include <cstring>
#include <fstream>
#include <limits>

namespace saqa {
namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path) : b_(bytes), path_(path) {}

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(b_[pos_]) |
                      (static_cast<std::uint8_t>(b_[pos_ + 1]) << 8);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(b_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > b_.size()) throw_validation("truncated SAFZ file: " + path_);
  }
  const std::string& b_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw_io("read failure: " + path);
  return bytes;
}

void spill(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_io("write failure: " + path);
}

constexpr char kMagic[4] = {'S', 'A', 'F', 'Z'};

}  // namespace

void write_feature_tensor(const std::string& path, const FeatureTensor& features) {
  if (features.data.dim0() != 4) throw_validation("write_feature_tensor: tensor must have 4 channels");
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, 1);
  put_u32(out, 4);
  put_u32(out, static_cast<std::uint32_t>(features.num_frames()));
  put_u32(out, static_cast<std::uint32_t>(features.mel_bins()));
  for (double v : features.data.data()) put_f32(out, static_cast<float>(v));
  spill(path, out);
}

FeatureTensor read_feature_tensor(const std::string& path) {
  const std::string bytes = slurp(path);
  Reader r(bytes, path);
  if (r.bytes(4) != std::string(kMagic, 4)) throw_validation("bad magic, not a SAFZ file: " + path);
  const std::uint16_t version = r.u16();
  if (version != 1) {
    throw_validation("SAFZ version " + std::to_string(version) + " is not a feature tensor: " + path);
  }
  const std::uint32_t channels = r.u32();
  const std::uint32_t num_frames = r.u32();
  const std::uint32_t mel_bins = r.u32();
  if (channels != 4) throw_validation("feature tensor must have 4 channels, got " + std::to_string(channels));
  FeatureTensor out;
  out.data = Tensor3(4, num_frames, mel_bins);
  for (double& v : out.data.data()) v = static_cast<double>(r.f32());
  if (!r.at_end()) throw_validation("trailing bytes in SAFZ file: " + path);
  return out;
}

void write_param_bundle(const std::string& path, const ParamBundle& bundle) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, 2);
  put_u32(out, static_cast<std::uint32_t>(bundle.size()));
  for (const auto& [name, tensor] : bundle) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw_validation("section name too long: " + name);
    }
    if (tensor.element_count() != tensor.values.size()) {
      throw_validation("section '" + name + "' dims do not match payload size");
    }
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
    for (auto d : tensor.dims) put_u32(out, d);
    for (float v : tensor.values) put_f32(out, v);
  }
  spill(path, out);
}

ParamBundle read_param_bundle(const std::string& path) {
  const std::string bytes = slurp(path);
  Reader r(bytes, path);
  if (r.bytes(4) != std::string(kMagic, 4)) throw_validation("bad magic, not a SAFZ file: " + path);
  const std::uint16_t version = r.u16();
  if (version != 2) {
    throw_validation("SAFZ version " + std::to_string(version) + " is not a parameter bundle: " + path);
  }
  const std::uint32_t count = r.u32();
  ParamBundle bundle;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    const std::string name = r.bytes(name_len);
    NamedTensor t;
    const std::uint32_t rank = r.u32();
    t.dims.resize(rank);
    for (auto& d : t.dims) d = r.u32();
    t.values.resize(t.element_count());
    for (auto& v : t.values) v = r.f32();
    if (!bundle.emplace(name, std::move(t)).second) {
      throw_validation("duplicate section '" + name + "' in " + path);
    }
  }
  if (!r.at_end()) throw_validation("trailing bytes in SAFZ file: " + path);
  return bundle;
}

}  // namespace saqa
