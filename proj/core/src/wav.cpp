#include "saqa/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "saqa/common.hpp"

namespace saqa {
namespace {

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits_per_sample = 0;
};

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

double decode_sample(const unsigned char* p, std::uint16_t bits, std::uint16_t format) {
  if (format == kFormatFloat) {
    float f;
    std::uint32_t raw = read_u32(p);
    std::memcpy(&f, &raw, sizeof(f));
    return static_cast<double>(f);
  }
  switch (bits) {
    case 16: {
      auto s = static_cast<std::int16_t>(read_u16(p));
      return static_cast<double>(s) / 32768.0;
    }
    case 24: {
      std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
      if (s & 0x800000) s |= ~0xFFFFFF;  // sign-extend
      return static_cast<double>(s) / 8388608.0;
    }
    case 32: {
      auto s = static_cast<std::int32_t>(read_u32(p));
      return static_cast<double>(s) / 2147483648.0;
    }
    default:
      return 0.0;  // unreachable, bit depth validated before decoding
  }
}

}  // namespace

StereoClip load_stereo_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw_io("read failure on WAV file: " + path);

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw_validation("not a RIFF/WAVE file: " + path);
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data_ptr = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    std::uint32_t size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size()) {
      throw_validation("truncated WAV chunk '" + std::string(id, 4) + "' in " + path);
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw_validation("malformed fmt chunk in " + path);
      const unsigned char* p = bytes.data() + pos;
      fmt.format = read_u16(p);
      fmt.channels = read_u16(p + 2);
      fmt.sample_rate = read_u32(p + 4);
      fmt.block_align = read_u16(p + 12);
      fmt.bits_per_sample = read_u16(p + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) throw_validation("malformed extensible fmt chunk in " + path);
        // First two bytes of the SubFormat GUID carry the actual format tag.
        fmt.format = read_u16(p + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_ptr = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr) {
    throw_validation("WAV file missing fmt or data chunk: " + path);
  }
  if (fmt.channels != 2) {
    throw_validation("expected 2 channels, got " + std::to_string(fmt.channels));
  }
  if (fmt.sample_rate == 0) throw_validation("invalid sample rate 0 in " + path);

  bool supported = (fmt.format == kFormatPcm &&
                    (fmt.bits_per_sample == 16 || fmt.bits_per_sample == 24 ||
                     fmt.bits_per_sample == 32)) ||
                   (fmt.format == kFormatFloat && fmt.bits_per_sample == 32);
  if (!supported) {
    throw_validation("unsupported WAV encoding: format tag " + std::to_string(fmt.format) +
                     ", " + std::to_string(fmt.bits_per_sample) + " bits per sample");
  }

  const std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
  const std::size_t frame_bytes = bytes_per_sample * 2;
  if (fmt.block_align != 0 && fmt.block_align != frame_bytes) {
    throw_validation("inconsistent block alignment in " + path);
  }
  const std::size_t num_frames = data_size / frame_bytes;

  StereoClip clip;
  clip.sample_rate_hz = fmt.sample_rate;
  clip.left.resize(num_frames);
  clip.right.resize(num_frames);
  for (std::size_t i = 0; i < num_frames; ++i) {
    const unsigned char* p = data_ptr + i * frame_bytes;
    clip.left[i] = decode_sample(p, fmt.bits_per_sample, fmt.format);
    clip.right[i] = decode_sample(p + bytes_per_sample, fmt.bits_per_sample, fmt.format);
  }

  for (std::size_t i = 0; i < num_frames; ++i) {
    if (!std::isfinite(clip.left[i]) || !std::isfinite(clip.right[i])) {
      throw_validation("non-finite sample at frame " + std::to_string(i) + " in " + path);
    }
  }
  return clip;
}

}  // namespace saqa
