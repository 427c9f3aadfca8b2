#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/error.hpp"

namespace ksr {

inline constexpr std::size_t kFrameLength = 320;  // 20 ms at 16 kHz
inline constexpr std::size_t kFrameHop = 160;     // 10 ms at 16 kHz
inline constexpr std::size_t kFftSize = 512;
inline constexpr std::size_t kSpectrumBins = kFftSize / 2 + 1;

/// Number of complete analysis frames in a clip of `len` samples.
inline std::size_t frame_count(std::size_t len) {
  if (len < kFrameLength) return 0;
  return (len - kFrameLength) / kFrameHop + 1;
}

/// w[n] = 0.54 - 0.46 cos(2 pi n / 319), n = 0..319.
inline const std::array<double, kFrameLength>& hamming_window() {
  static const std::array<double, kFrameLength> window = [] {
    std::array<double, kFrameLength> w{};
    constexpr double two_pi = 2.0 * 3.141592653589793238462643383279502884;
    for (std::size_t n = 0; n < kFrameLength; ++n)
      w[n] = 0.54 - 0.46 * std::cos(two_pi * static_cast<double>(n) /
                                    static_cast<double>(kFrameLength - 1));
    return w;
  }();
  return window;
}

/// Cuts a clip into 20 ms frames with a 10 ms hop and applies the Hamming
/// window. Frame t covers samples [160t, 160t + 320).
inline std::vector<std::vector<double>> frame_and_window(const AudioClip& clip) {
  const std::size_t len = clip.samples.size();
  if (len < kFrameLength)
    fail(ErrorCode::TooShort,
         "clip " + clip.utterance_id + " has " + std::to_string(len) +
             " samples, need at least " + std::to_string(kFrameLength));
  const auto& window = hamming_window();
  const std::size_t count = frame_count(len);
  std::vector<std::vector<double>> frames(count);
  for (std::size_t t = 0; t < count; ++t) {
    frames[t].resize(kFrameLength);
    const double* src = clip.samples.data() + t * kFrameHop;
    for (std::size_t n = 0; n < kFrameLength; ++n)
      frames[t][n] = src[n] * window[n];
  }
  return frames;
}

namespace detail {

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  constexpr double pi = 3.141592653589793238462643383279502884;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

/// Magnitude spectrum of one windowed frame: zero-pad to 512 points and
/// return |X(k)| for bins 0..256.
inline std::vector<double> magnitude_spectrum(std::span<const double> frame) {
  if (frame.size() != kFrameLength)
    fail(ErrorCode::InvalidArgument,
         "frame must have 320 samples, got " + std::to_string(frame.size()));
  std::vector<std::complex<double>> buf(kFftSize, {0.0, 0.0});
  for (std::size_t n = 0; n < kFrameLength; ++n) buf[n] = frame[n];
  detail::fft_inplace(buf);
  std::vector<double> mags(kSpectrumBins);
  for (std::size_t k = 0; k < kSpectrumBins; ++k) mags[k] = std::abs(buf[k]);
  return mags;
}

}  // namespace ksr
