#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/binio.hpp"
#include "ksr/dsp.hpp"
#include "ksr/error.hpp"
#include "ksr/filterbank.hpp"
#include "ksr/sad.hpp"

namespace ksr {

inline constexpr std::size_t kSubBandDim = 4;
inline constexpr std::size_t kFullBandDim = 19;

/// Selects the front-end: one of the 21 four-filter sub-bands, or the
/// full 24-filter bank.
struct BandMode {
  int subband_index = 0;  // 0 = full band, 1..21 = sub-band N

  static BandMode fullband() { return BandMode{0}; }
  static BandMode subband(int n) {
    make_subband_spec(n);  // range check
    return BandMode{n};
  }

  bool is_fullband() const { return subband_index == 0; }
  std::size_t dim() const { return is_fullband() ? kFullBandDim : kSubBandDim; }

  std::string label() const {
    return is_fullband() ? "full" : "sub" + std::to_string(subband_index);
  }

  bool operator==(const BandMode&) const = default;
};

/// Frames-by-coefficients matrix of MFCCs, row major.
struct FeatureMatrix {
  BandMode band_mode;
  std::size_t n_frames = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  bool normalized = false;

  double* row(std::size_t t) { return values.data() + t * dim; }
  const double* row(std::size_t t) const { return values.data() + t * dim; }
  double at(std::size_t t, std::size_t d) const { return values[t * dim + d]; }
};

namespace detail {

/// Orthonormal DCT-II: y_j = s_j sum_i x_i cos(pi j (2i+1) / (2N)),
/// s_0 = sqrt(1/N), s_j = sqrt(2/N).
template <std::size_t N>
const std::array<std::array<double, N>, N>& dct2_matrix() {
  static const std::array<std::array<double, N>, N> m = [] {
    std::array<std::array<double, N>, N> d{};
    constexpr double pi = 3.141592653589793238462643383279502884;
    const double s0 = std::sqrt(1.0 / static_cast<double>(N));
    const double sj = std::sqrt(2.0 / static_cast<double>(N));
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = 0; i < N; ++i)
        d[j][i] = (j == 0 ? s0 : sj) *
                  std::cos(pi * static_cast<double>(j) *
                           (2.0 * static_cast<double>(i) + 1.0) /
                           (2.0 * static_cast<double>(N)));
    return d;
  }();
  return m;
}

template <std::size_t N>
std::array<double, N> dct2(std::span<const double> x) {
  const auto& m = dct2_matrix<N>();
  std::array<double, N> y{};
  for (std::size_t j = 0; j < N; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) acc += m[j][i] * x[i];
    y[j] = acc;
  }
  return y;
}

/// Inverse of the orthonormal DCT-II (its transpose).
template <std::size_t N>
std::array<double, N> idct2(std::span<const double> y) {
  const auto& m = dct2_matrix<N>();
  std::array<double, N> x{};
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) acc += m[j][i] * y[j];
    x[i] = acc;
  }
  return x;
}

}  // namespace detail

/// 4 MFCCs of one sub-band: orthonormal DCT-II of the 4 filter energies
/// N..N+3, all coefficients kept (c0..c3).
inline std::array<double, kSubBandDim> subband_mfcc(
    std::span<const double, kNumFilters> energies, const SubBandSpec& spec) {
  std::array<double, kSubBandDim> band{};
  for (std::size_t i = 0; i < kSubBandDim; ++i)
    band[i] = energies[static_cast<std::size_t>(spec.filter_lo() - 1) + i];
  return detail::dct2<kSubBandDim>(band);
}

/// 19 MFCCs of the full band: orthonormal DCT-II of all 24 filter
/// energies, keeping c1..c19 (c0 dropped).
inline std::array<double, kFullBandDim> fullband_mfcc(
    std::span<const double, kNumFilters> energies) {
  const auto coeffs = detail::dct2<kNumFilters>(energies);
  std::array<double, kFullBandDim> kept{};
  for (std::size_t j = 0; j < kFullBandDim; ++j) kept[j] = coeffs[j + 1];
  return kept;
}

inline constexpr double kCmvnVarianceFloor = 1e-12;

/// Per-utterance, per-dimension mean and variance normalization. Columns
/// with variance below 1e-12 become all zero.
inline FeatureMatrix cmvn(const FeatureMatrix& features) {
  if (features.n_frames < 2)
    fail(ErrorCode::TooFewFrames,
         "cmvn needs at least 2 frames, got " + std::to_string(features.n_frames));
  FeatureMatrix out = features;
  const std::size_t T = features.n_frames;
  const std::size_t D = features.dim;
  for (std::size_t d = 0; d < D; ++d) {
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += features.at(t, d);
    mean /= static_cast<double>(T);
    double var = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double c = features.at(t, d) - mean;
      var += c * c;
    }
    var /= static_cast<double>(T);
    if (var < kCmvnVarianceFloor) {
      for (std::size_t t = 0; t < T; ++t) out.row(t)[d] = 0.0;
    } else {
      const double inv_std = 1.0 / std::sqrt(var);
      for (std::size_t t = 0; t < T; ++t)
        out.row(t)[d] = (features.at(t, d) - mean) * inv_std;
    }
  }
  out.normalized = true;
  return out;
}

/// Per-frame log filterbank energies of the speech portion of a clip:
/// SAD, framing, windowing, magnitude spectra, 24 filters. Band-agnostic
/// intermediate shared by all band modes.
struct EnergyMatrix {
  std::size_t n_frames = 0;
  std::vector<double> values;  // n_frames x 24, row major

  const double* row(std::size_t t) const {
    return values.data() + t * kNumFilters;
  }
};

inline EnergyMatrix compute_energy_matrix(const AudioClip& clip) {
  const AudioClip speech = detect_speech(clip);
  const auto frames = frame_and_window(speech);  // throws TooShort
  const MelFilterbank& fb = filterbank();

  EnergyMatrix em;
  em.n_frames = frames.size();
  em.values.resize(em.n_frames * kNumFilters);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto spectrum = magnitude_spectrum(frames[t]);
    const auto energies = log_filterbank_energies(spectrum, fb);
    for (std::size_t f = 0; f < kNumFilters; ++f)
      em.values[t * kNumFilters + f] = energies[f];
  }
  return em;
}

/// MFCC + CMVN stage applied to precomputed filterbank energies.
inline FeatureMatrix features_from_energies(const EnergyMatrix& energies,
                                            BandMode band_mode) {
  FeatureMatrix raw;
  raw.band_mode = band_mode;
  raw.n_frames = energies.n_frames;
  raw.dim = band_mode.dim();
  raw.values.resize(raw.n_frames * raw.dim);

  if (band_mode.is_fullband()) {
    for (std::size_t t = 0; t < energies.n_frames; ++t) {
      const auto c = fullband_mfcc(
          std::span<const double, kNumFilters>(energies.row(t), kNumFilters));
      for (std::size_t d = 0; d < kFullBandDim; ++d) raw.row(t)[d] = c[d];
    }
  } else {
    const SubBandSpec spec = make_subband_spec(band_mode.subband_index);
    for (std::size_t t = 0; t < energies.n_frames; ++t) {
      const auto c = subband_mfcc(
          std::span<const double, kNumFilters>(energies.row(t), kNumFilters),
          spec);
      for (std::size_t d = 0; d < kSubBandDim; ++d) raw.row(t)[d] = c[d];
    }
  }
  return cmvn(raw);
}

/// Full front end for one utterance: SAD -> framing -> spectra -> filter
/// energies -> (sub-band | full-band) MFCCs -> CMVN.
inline FeatureMatrix extract_features(const AudioClip& clip, BandMode band_mode) {
  return features_from_energies(compute_energy_matrix(clip), band_mode);
}

// --- feature dump file ("KSFV") -------------------------------------------

inline constexpr std::uint32_t kFeatureFileVersion = 1;

inline void save_features(const std::filesystem::path& path,
                          const FeatureMatrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_magic(out, "KSFV");
  write_u32(out, kFeatureFileVersion);
  write_u32(out, static_cast<std::uint32_t>(features.band_mode.subband_index));
  write_u32(out, static_cast<std::uint32_t>(features.n_frames));
  write_u32(out, static_cast<std::uint32_t>(features.dim));
  for (double v : features.values) write_f64(out, v);
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  const std::string ctx = path.string();
  expect_magic(in, "KSFV", ctx);
  const std::uint32_t version = read_u32(in, ctx);
  if (version != kFeatureFileVersion)
    fail(ErrorCode::UnsupportedFormat,
         ctx + ": unsupported version " + std::to_string(version));
  const std::uint32_t band = read_u32(in, ctx);
  FeatureMatrix features;
  features.band_mode =
      band == 0 ? BandMode::fullband() : BandMode::subband(static_cast<int>(band));
  features.n_frames = read_u32(in, ctx);
  features.dim = read_u32(in, ctx);
  if (features.dim != features.band_mode.dim())
    fail(ErrorCode::UnsupportedFormat, ctx + ": dim does not match band mode");
  features.values.resize(features.n_frames * features.dim);
  for (auto& v : features.values) v = read_f64(in, ctx);
  features.normalized = true;
  return features;
}

}  // namespace ksr
