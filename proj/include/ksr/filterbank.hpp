#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ksr/dsp.hpp"
#include "ksr/error.hpp"

namespace ksr {

inline constexpr std::size_t kNumFilters = 24;
inline constexpr int kNumSubBands = 21;
inline constexpr int kFiltersPerSubBand = 4;

// Keeps ln() finite on exactly-zero spectra. Must sit far below any energy
// a nonzero 16-bit sample can produce: a floor inside the reachable range
// turns the constant log-energy shift of amplitude scaling into a
// frame-dependent one, which CMVN cannot absorb.
inline constexpr double kLogEnergyFloor = 1e-30;

/// Center frequencies (Hz) of the 24 Mel-spaced band-pass filters.
inline constexpr std::array<double, kNumFilters> kFilterCentersHz = {
    156,  281,  406,  500,  625,  750,  875,  1000, 1125, 1281, 1437, 1625,
    1843, 2062, 2343, 2656, 3000, 3375, 3812, 4312, 4906, 5531, 6281, 7093};

struct MelFilter {
  double lower_hz = 0.0;
  double center_hz = 0.0;
  double upper_hz = 0.0;

  /// Triangular response: 1 at the center, 0 at and beyond the edges.
  double weight(double freq_hz) const {
    if (freq_hz <= lower_hz || freq_hz >= upper_hz) return 0.0;
    if (freq_hz <= center_hz) return (freq_hz - lower_hz) / (center_hz - lower_hz);
    return (upper_hz - freq_hz) / (upper_hz - center_hz);
  }
};

/// 24 triangular filters spanning 0..8000 Hz. The cut-off frequencies of a
/// filter are the center frequencies of its neighbours; filter 1 starts at
/// 0 Hz and filter 24 ends at 8000 Hz. Weights are sampled at FFT bin
/// center frequencies.
struct MelFilterbank {
  std::array<MelFilter, kNumFilters> filters;
  int fft_size = static_cast<int>(kFftSize);
  int sample_rate_hz = kSampleRateHz;
  // bin_weights[f][b] is filter f's response at spectrum bin b.
  std::array<std::vector<double>, kNumFilters> bin_weights;

  double bin_hz(std::size_t bin) const {
    return static_cast<double>(bin) * sample_rate_hz / fft_size;
  }
};

inline MelFilterbank build_filterbank() {
  MelFilterbank fb;
  for (std::size_t f = 0; f < kNumFilters; ++f) {
    MelFilter filt;
    filt.center_hz = kFilterCentersHz[f];
    filt.lower_hz = (f == 0) ? 0.0 : kFilterCentersHz[f - 1];
    filt.upper_hz = (f == kNumFilters - 1) ? 8000.0 : kFilterCentersHz[f + 1];
    fb.filters[f] = filt;

    auto& weights = fb.bin_weights[f];
    weights.assign(kSpectrumBins, 0.0);
    for (std::size_t b = 0; b < kSpectrumBins; ++b)
      weights[b] = filt.weight(fb.bin_hz(b));
  }
  return fb;
}

/// Shared immutable filterbank instance.
inline const MelFilterbank& filterbank() {
  static const MelFilterbank fb = build_filterbank();
  return fb;
}

/// Log filterbank energies from one magnitude spectrum:
/// e_k = ln(max(sum_b w_k(b) |X(b)|^2, floor)).
inline std::array<double, kNumFilters> log_filterbank_energies(
    std::span<const double> spectrum, const MelFilterbank& fb) {
  if (spectrum.size() != kSpectrumBins)
    fail(ErrorCode::InvalidArgument,
         "spectrum must have 257 bins, got " + std::to_string(spectrum.size()));
  std::array<double, kNumFilters> energies{};
  for (std::size_t f = 0; f < kNumFilters; ++f) {
    const auto& weights = fb.bin_weights[f];
    double acc = 0.0;
    for (std::size_t b = 0; b < kSpectrumBins; ++b) {
      const double mag = spectrum[b];
      acc += weights[b] * mag * mag;
    }
    energies[f] = std::log(acc > kLogEnergyFloor ? acc : kLogEnergyFloor);
  }
  return energies;
}

/// Sub-band N covers the outputs of filters N..N+3 (1-based), N = 1..21.
struct SubBandSpec {
  int index_n = 1;

  int filter_lo() const { return index_n; }
  int filter_hi() const { return index_n + kFiltersPerSubBand - 1; }

  double span_lo_hz(const MelFilterbank& fb) const {
    return fb.filters[static_cast<std::size_t>(filter_lo() - 1)].lower_hz;
  }
  double span_hi_hz(const MelFilterbank& fb) const {
    return fb.filters[static_cast<std::size_t>(filter_hi() - 1)].upper_hz;
  }
};

inline SubBandSpec make_subband_spec(int index_n) {
  if (index_n < 1 || index_n > kNumSubBands)
    fail(ErrorCode::InvalidArgument,
         "sub-band index must be in [1, 21], got " + std::to_string(index_n));
  return SubBandSpec{index_n};
}

}  // namespace ksr
