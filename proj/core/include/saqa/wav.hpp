#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace saqa {

struct StereoClip {
  std::vector<double> left;
  std::vector<double> right;
  std::uint32_t sample_rate_hz = 0;
};

// Reads a 2-channel PCM WAV (16/24/32-bit int or 32-bit float, plain or
// WAVE_FORMAT_EXTENSIBLE). Integer samples are scaled by 1/2^(bits-1), so
// int16 -32768 maps to exactly -1.0 and 32767 to 32767/32768.
// Throws Error(Io) when the file cannot be read, Error(Validation) for
// non-WAV payloads, channel counts other than 2 and unsupported bit depths,
// each with a distinct message.
StereoClip load_stereo_wav(const std::string& path);

}  // namespace saqa
