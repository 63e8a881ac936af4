#include "saqa/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

namespace saqa {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. Inputs sized to a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Direct DFT fallback for non-power-of-two transform sizes.
void dft_naive(const std::vector<std::complex<double>>& in,
               std::vector<std::complex<double>>& out) {
  const std::size_t n = in.size();
  out.assign(n, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(t) /
                         static_cast<double>(n);
      acc += in[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

RealGrid mel_filterbank(std::size_t mel_bins, std::size_t nfft, double sample_rate_hz) {
  if (mel_bins == 0) throw_validation("mel_filterbank: mel_bins must be positive");
  if (nfft < 2) throw_validation("mel_filterbank: nfft too small");
  if (sample_rate_hz <= 0.0) throw_validation("mel_filterbank: sample rate must be positive");

  const std::size_t freq_bins = nfft / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> edges_hz(mel_bins + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    edges_hz[i] = mel_to_hz(mel_max * static_cast<double>(i) /
                            static_cast<double>(mel_bins + 1));
  }

  RealGrid w(mel_bins, freq_bins, 0.0);
  for (std::size_t m = 0; m < mel_bins; ++m) {
    const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
    for (std::size_t k = 0; k < freq_bins; ++k) {
      const double f = sample_rate_hz * static_cast<double>(k) / static_cast<double>(nfft);
      double v = 0.0;
      if (f > lo && f < mid) {
        v = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        v = (hi - f) / (hi - mid);
      }
      w(m, k) = v;
    }
    double row_sum = 0.0;
    for (std::size_t k = 0; k < freq_bins; ++k) row_sum += w(m, k);
    if (row_sum <= 0.0) {
      // Filter narrower than one FFT bin: pin it to the nearest bin so every
      // row keeps a positive sum.
      const std::size_t k = std::min<std::size_t>(
          freq_bins - 1,
          static_cast<std::size_t>(std::lround(mid * nfft / sample_rate_hz)));
      w(m, k) = 1.0;
    }
  }
  return w;
}

ComplexSpectrogram stft(const std::vector<double>& channel, std::uint32_t sample_rate_hz,
                        std::size_t win_len, std::size_t hop_len, std::size_t nfft,
                        WindowKind window) {
  if (hop_len == 0) throw_validation("stft: hop length must be positive");
  if (win_len == 0) throw_validation("stft: window length must be positive");
  if (win_len > nfft) throw_validation("stft: window length exceeds nfft");
  if (channel.size() < win_len) {
    throw_validation("stft: signal shorter than one window (" +
                     std::to_string(channel.size()) + " < " + std::to_string(win_len) + ")");
  }
  if (sample_rate_hz == 0) throw_validation("stft: sample rate must be positive");

  const std::size_t num_frames = 1 + (channel.size() - win_len) / hop_len;
  const std::size_t freq_bins = nfft / 2 + 1;

  std::vector<double> win(win_len, 1.0);
  if (window == WindowKind::Hann) {
    for (std::size_t n = 0; n < win_len; ++n) {
      win[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                    static_cast<double>(win_len));
    }
  }

  ComplexSpectrogram out;
  out.frames = ComplexGrid(num_frames, freq_bins);
  out.hop_s = static_cast<double>(hop_len) / static_cast<double>(sample_rate_hz);

  const bool pow2 = is_power_of_two(nfft);
  std::vector<std::complex<double>> buf(nfft), scratch;
  for (std::size_t t = 0; t < num_frames; ++t) {
    const std::size_t off = t * hop_len;
    for (std::size_t n = 0; n < win_len; ++n) {
      buf[n] = std::complex<double>(channel[off + n] * win[n], 0.0);
    }
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(win_len), buf.end(),
              std::complex<double>(0.0, 0.0));
    if (pow2) {
      fft_radix2(buf);
      for (std::size_t k = 0; k < freq_bins; ++k) out.frames(t, k) = buf[k];
      // buf is consumed in place; refill next iteration
    } else {
      dft_naive(buf, scratch);
      for (std::size_t k = 0; k < freq_bins; ++k) out.frames(t, k) = scratch[k];
    }
  }
  return out;
}

RealGrid mel_power(const ComplexSpectrogram& spec, const RealGrid& melW, double log_floor) {
  if (log_floor <= 0.0) throw_validation("mel_power: log floor must be positive");
  if (melW.cols() != spec.freq_bins()) {
    throw_validation("mel_power: filterbank has " + std::to_string(melW.cols()) +
                     " bins, spectrogram has " + std::to_string(spec.freq_bins()));
  }
  for (std::size_t m = 0; m < melW.rows(); ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < melW.cols(); ++k) s += melW(m, k);
    if (s <= 0.0) throw_validation("mel_power: filterbank row " + std::to_string(m) + " sums to zero");
  }

  const std::size_t num_frames = spec.num_frames();
  RealGrid out(num_frames, melW.rows());
  std::vector<double> power(spec.freq_bins());
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t k = 0; k < spec.freq_bins(); ++k) {
      power[k] = std::norm(spec.frames(t, k));
    }
    for (std::size_t m = 0; m < melW.rows(); ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < spec.freq_bins(); ++k) acc += melW(m, k) * power[k];
      out(t, m) = std::log(acc + log_floor);
    }
  }
  return out;
}

RealGrid ipd(const ComplexSpectrogram& left, const ComplexSpectrogram& right) {
  if (!left.frames.same_shape(right.frames)) {
    throw_validation("ipd: spectrogram shapes differ");
  }
  RealGrid out(left.num_frames(), left.freq_bins());
  for (std::size_t t = 0; t < left.num_frames(); ++t) {
    for (std::size_t k = 0; k < left.freq_bins(); ++k) {
      const auto l = left.frames(t, k);
      const auto r = right.frames(t, k);
      if (std::abs(l) == 0.0 || std::abs(r) == 0.0) {
        out(t, k) = 0.0;  // phase undefined at silent bins
      } else {
        out(t, k) = wrap_phase(std::arg(l) - std::arg(r));
      }
    }
  }
  return out;
}

FeatureTensor assemble_features(const RealGrid& s1, const RealGrid& s2,
                                const RealGrid& ipd_grid, const RealGrid& melW) {
  const std::size_t num_frames = s1.rows();
  const std::size_t mel_bins = s1.cols();
  const std::size_t freq_bins = ipd_grid.cols();
  if (!s1.same_shape(s2)) throw_validation("assemble_features: S1/S2 shapes differ");
  if (ipd_grid.rows() != num_frames) {
    throw_validation("assemble_features: IPD frame count mismatch");
  }
  if (melW.rows() != mel_bins || melW.cols() != freq_bins) {
    throw_validation("assemble_features: filterbank shape mismatch");
  }

  FeatureTensor out;
  out.data = Tensor3(4, num_frames, mel_bins);
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t m = 0; m < mel_bins; ++m) {
      out.data(0, t, m) = s1(t, m);
      out.data(1, t, m) = s2(t, m);
      double cos_acc = 0.0, sin_acc = 0.0;
      for (std::size_t k = 0; k < freq_bins; ++k) {
        const double w = melW(m, k);
        const double phi = ipd_grid(t, k);
        cos_acc += w * std::cos(phi);
        sin_acc += w * std::sin(phi);
      }
      out.data(2, t, m) = cos_acc;
      out.data(3, t, m) = sin_acc;
    }
  }
  return out;
}

FeatureTensor extract_features(const StereoClip& clip, const FrontendConfig& cfg) {
  if (clip.left.size() != clip.right.size()) {
    throw_validation("extract_features: channel lengths differ");
  }
  if (clip.sample_rate_hz != cfg.sample_rate_hz) {
    throw_validation("extract_features: clip rate " + std::to_string(clip.sample_rate_hz) +
                     " Hz does not match configured rate " +
                     std::to_string(cfg.sample_rate_hz) + " Hz (resampling is out of scope)");
  }
  const auto spec_l = stft(clip.left, cfg.sample_rate_hz, cfg.win_len, cfg.hop_len,
                           cfg.nfft, cfg.window);
  const auto spec_r = stft(clip.right, cfg.sample_rate_hz, cfg.win_len, cfg.hop_len,
                           cfg.nfft, cfg.window);
  const RealGrid melW = mel_filterbank(cfg.mel_bins, cfg.nfft, cfg.sample_rate_hz);
  const RealGrid s1 = mel_power(spec_l, melW, cfg.log_floor);
  const RealGrid s2 = mel_power(spec_r, melW, cfg.log_floor);
  const RealGrid phase = ipd(spec_l, spec_r);
  return assemble_features(s1, s2, phase, melW);
}

std::vector<std::string> validate_feature_tensor(const FeatureTensor& features,
                                                 const RealGrid& melW) {
  std::vector<std::string> diags;
  if (features.data.dim0() != 4) {
    diags.push_back("feature tensor must have exactly 4 channels, got " +
                    std::to_string(features.data.dim0()));
    return diags;
  }
  std::vector<double> bound(melW.rows(), 0.0);
  for (std::size_t m = 0; m < melW.rows(); ++m) {
    for (std::size_t k = 0; k < melW.cols(); ++k) bound[m] += melW(m, k);
  }
  const double slack = 1e-9;
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t t = 0; t < features.num_frames(); ++t) {
      for (std::size_t m = 0; m < features.mel_bins(); ++m) {
        const double v = features.data(c, t, m);
        if (!std::isfinite(v)) {
          diags.push_back("non-finite value at channel " + std::to_string(c) + ", frame " +
                          std::to_string(t) + ", mel " + std::to_string(m));
        } else if (c >= 2 && m < bound.size() && std::abs(v) > bound[m] + slack) {
          diags.push_back("channel " + std::to_string(c) + " exceeds mel projection bound at frame " +
                          std::to_string(t) + ", mel " + std::to_string(m));
        }
      }
    }
  }
  return diags;
}

std::string feature_tensor_csv(const FeatureTensor& features) {
  std::string out = "channel,frame";
  for (std::size_t m = 0; m < features.mel_bins(); ++m) {
    out += ",m" + std::to_string(m);
  }
  out += "\n";
  char buf[64];
  for (std::size_t c = 0; c < features.data.dim0(); ++c) {
    for (std::size_t t = 0; t < features.num_frames(); ++t) {
      out += std::to_string(c) + "," + std::to_string(t);
      for (std::size_t m = 0; m < features.mel_bins(); ++m) {
        std::snprintf(buf, sizeof(buf), ",%.9g", features.data(c, t, m));
        out += buf;
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace saqa
