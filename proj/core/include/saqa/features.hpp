#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saqa/common.hpp"
#include "saqa/wav.hpp"

namespace saqa {

enum class WindowKind { Hann, Rectangular };

// Stereo front end defaults. All knobs configurable; the defaults follow the
// common stereo SELD convention (24 kHz, 1024-sample window, 480-sample hop,
// 64 mel bins).
struct FrontendConfig {
  std::uint32_t sample_rate_hz = 24000;
  std::size_t win_len = 1024;
  std::size_t hop_len = 480;
  std::size_t nfft = 1024;
  std::size_t mel_bins = 64;
  double log_floor = 1e-10;
  WindowKind window = WindowKind::Hann;
};

// One-sided complex STFT, frames laid out T x F with F = nfft/2 + 1.
struct ComplexSpectrogram {
  ComplexGrid frames;
  double hop_s = 0.0;
  std::size_t freq_bins() const { return frames.cols(); }
  std::size_t num_frames() const { return frames.rows(); }
};

// 4 x T x M stack: [log-mel ch1; log-mel ch2; cos(IPD)*melW; sin(IPD)*melW].
struct FeatureTensor {
  Tensor3 data;  // 4 x T x M
  std::size_t num_frames() const { return data.dim1(); }
  std::size_t mel_bins() const { return data.dim2(); }
};

// Triangular filters on the HTK mel scale between 0 Hz and sample_rate/2,
// no area normalization. Result is mel_bins x (nfft/2 + 1), every row sums
// to a positive value.
RealGrid mel_filterbank(std::size_t mel_bins, std::size_t nfft, double sample_rate_hz);

// T = 1 + floor((len - win_len) / hop_len), no centering or padding.
// Throws when the signal is shorter than one window, hop is zero or
// win_len > nfft.
ComplexSpectrogram stft(const std::vector<double>& channel, std::uint32_t sample_rate_hz,
                        std::size_t win_len, std::size_t hop_len, std::size_t nfft,
                        WindowKind window = WindowKind::Hann);

// log(melW . |spec|^2 + log_floor), T x M.
RealGrid mel_power(const ComplexSpectrogram& spec, const RealGrid& melW, double log_floor);

// Principal-value phase difference arg(left) - arg(right) in (-pi, pi],
// defined as 0 wherever either magnitude is zero. T x F.
RealGrid ipd(const ComplexSpectrogram& left, const ComplexSpectrogram& right);

// Stacks the four channels; channels 2 and 3 are cos/sin of the IPD grid
// projected through melW per frame.
FeatureTensor assemble_features(const RealGrid& s1, const RealGrid& s2,
                                const RealGrid& ipd_grid, const RealGrid& melW);

// Whole pipeline: per-channel STFT -> log-mel + IPD -> assembled tensor.
FeatureTensor extract_features(const StereoClip& clip, const FrontendConfig& cfg);

// Checks finiteness and the |channel 2/3| <= melW . 1 bound; returns
// diagnostics, empty when valid.
std::vector<std::string> validate_feature_tensor(const FeatureTensor& features,
                                                 const RealGrid& melW);

// Debug dump: header "channel,frame,m0,..." then one row per (channel, frame).
std::string feature_tensor_csv(const FeatureTensor& features);

}  // namespace saqa
