#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/error.hpp"
#include "ksr/rng.hpp"

namespace ksr {

inline constexpr int kNumFormants = 4;

/// Parameters of one synthetic speaker. Serves as a stand-in corpus
/// source: a child-like pitch range and four vocal-tract resonances.
struct SyntheticSpeakerProfile {
  std::string speaker_id;
  double f0_hz = 250.0;                           // in [180, 420]
  std::array<double, kNumFormants> formants_hz{}; // strictly increasing, < 7000
  std::array<double, kNumFormants> formant_bandwidths_hz{};
  double noise_mix = 0.1;                         // in [0, 0.5]
  std::uint64_t seed = 0;
};

inline void validate_profile(const SyntheticSpeakerProfile& profile) {
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::InvalidProfile, profile.speaker_id + ": " + why);
  };
  if (!std::isfinite(profile.f0_hz) || profile.f0_hz < 180.0 ||
      profile.f0_hz > 420.0)
    bad("f0 must be in [180, 420] Hz");
  double prev = 0.0;
  for (double f : profile.formants_hz) {
    if (!std::isfinite(f) || f <= prev) bad("formants must be strictly increasing");
    if (f >= 7000.0) bad("formants must be below 7000 Hz");
    prev = f;
  }
  for (double bw : profile.formant_bandwidths_hz)
    if (!std::isfinite(bw) || bw <= 0.0) bad("bandwidths must be positive");
  if (!std::isfinite(profile.noise_mix) || profile.noise_mix < 0.0 ||
      profile.noise_mix > 0.5)
    bad("noise_mix must be in [0, 0.5]");
}

/// Draws a speaker profile from child-like ranges.
inline SyntheticSpeakerProfile make_speaker_profile(const std::string& speaker_id,
                                                    std::uint64_t seed) {
  Rng rng(mix_seed(seed, hash_string(speaker_id), 0x5eedu));
  SyntheticSpeakerProfile p;
  p.speaker_id = speaker_id;
  p.seed = seed;
  p.f0_hz = rng.uniform(190.0, 410.0);
  p.formants_hz = {rng.uniform(450.0, 1050.0), rng.uniform(1350.0, 2500.0),
                   rng.uniform(2750.0, 4100.0), rng.uniform(4350.0, 6000.0)};
  for (int i = 0; i < kNumFormants; ++i)
    p.formant_bandwidths_hz[static_cast<std::size_t>(i)] =
        rng.uniform(60.0, 140.0) +
        0.02 * p.formants_hz[static_cast<std::size_t>(i)];
  p.noise_mix = rng.uniform(0.05, 0.25);
  validate_profile(p);
  return p;
}

namespace detail {

/// Two-pole resonator, unit gain at DC:
/// y[n] = A x[n] + B y[n-1] + C y[n-2].
struct Resonator {
  double a = 1.0, b = 0.0, c = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(double freq_hz, double bw_hz, double fs) {
    const double pi = 3.141592653589793238462643383279502884;
    c = -std::exp(-2.0 * pi * bw_hz / fs);
    b = 2.0 * std::exp(-pi * bw_hz / fs) * std::cos(2.0 * pi * freq_hz / fs);
    a = 1.0 - b - c;
  }

  double step(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Vowel targets shared by all speakers, as multipliers on the profile
// formants. Moving targets keep the vowel inventory common while the
// absolute resonances stay speaker specific, so per-utterance feature
// normalization does not erase the speaker.
inline constexpr int kNumVowels = 5;
inline constexpr std::array<std::array<double, kNumFormants>, kNumVowels>
    kVowelFormantScale = {{
        {1.30, 0.80, 1.00, 1.00},   // open
        {0.60, 1.25, 1.08, 1.02},   // close front
        {0.75, 0.62, 0.97, 0.99},   // close back
        {1.00, 1.00, 1.00, 1.00},   // neutral
        {0.88, 1.12, 1.15, 1.05},   // mid front
    }};

}  // namespace detail

/// Synthesizes one utterance for a speaker profile: a glottal impulse
/// train with slow pitch drift drives four cascade formant resonators
/// gliding between shared vowel targets; white noise is mixed in with
/// weight noise_mix; ~200 ms silence gaps are inserted every ~2 s; the
/// result is peak-normalized to 0.5. Bit-identical for identical
/// (profile, seed, duration).
inline AudioClip synth_utterance(const SyntheticSpeakerProfile& profile,
                                 double duration_s, std::uint64_t seed) {
  validate_profile(profile);
  if (!(duration_s > 0.0))
    fail(ErrorCode::InvalidArgument, "duration must be positive");

  const double fs = static_cast<double>(kSampleRateHz);
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  Rng rng(mix_seed(profile.seed, seed, hash_string(profile.speaker_id)));

  // Vowel plan: ~300 ms segments, each picking one shared vowel target.
  struct Knot {
    std::size_t start;
    std::array<double, kNumFormants> formants;
  };
  std::vector<Knot> knots;
  {
    std::size_t pos = 0;
    while (pos < n) {
      const int v = static_cast<int>(rng.uniform_int(detail::kNumVowels));
      Knot k;
      k.start = pos;
      for (std::size_t i = 0; i < kNumFormants; ++i) {
        double f = profile.formants_hz[i] *
                   detail::kVowelFormantScale[static_cast<std::size_t>(v)][i];
        if (f > 7400.0) f = 7400.0;
        k.formants[i] = f;
      }
      knots.push_back(k);
      pos += static_cast<std::size_t>(rng.uniform(0.25, 0.40) * fs);
    }
  }

  const double phase_a = rng.uniform(0.0, 6.283185307179586);
  const double phase_b = rng.uniform(0.0, 6.283185307179586);

  // Glottal source: impulse train with slow multiplicative pitch drift.
  std::vector<double> excitation(n, 0.0);
  {
    double t_pulse = 0.0;
    while (t_pulse < static_cast<double>(n)) {
      const double t_s = t_pulse / fs;
      const double f0 =
          profile.f0_hz * (1.0 + 0.06 * std::sin(2.0 * 3.141592653589793 * 0.35 * t_s + phase_a) +
                           0.04 * std::sin(2.0 * 3.141592653589793 * 1.30 * t_s + phase_b));
      excitation[static_cast<std::size_t>(t_pulse)] = 1.0;
      t_pulse += std::floor(fs / f0 + 0.5);
    }
  }

  // Cascade resonators, retuned every 5 ms along the vowel glide.
  std::array<detail::Resonator, kNumFormants> resonators;
  std::vector<double> voiced(n, 0.0);
  {
    constexpr std::size_t block = 80;  // 5 ms
    constexpr double glide_s = 0.060;  // transition time between targets
    std::size_t knot_idx = 0;
    for (std::size_t start = 0; start < n; start += block) {
      while (knot_idx + 1 < knots.size() && knots[knot_idx + 1].start <= start)
        ++knot_idx;
      std::array<double, kNumFormants> target = knots[knot_idx].formants;
      if (knot_idx > 0) {
        const double since =
            static_cast<double>(start - knots[knot_idx].start) / fs;
        if (since < glide_s) {
          const double a = since / glide_s;
          for (std::size_t i = 0; i < kNumFormants; ++i)
            target[i] = (1.0 - a) * knots[knot_idx - 1].formants[i] +
                        a * knots[knot_idx].formants[i];
        }
      }
      for (std::size_t i = 0; i < kNumFormants; ++i)
        resonators[i].tune(target[i], profile.formant_bandwidths_hz[i], fs);

      const std::size_t end = std::min(start + block, n);
      for (std::size_t s = start; s < end; ++s) {
        double x = excitation[s];
        for (auto& r : resonators) x = r.step(x);
        voiced[s] = x;
      }
    }
  }

  double voiced_peak = 0.0;
  for (double v : voiced) voiced_peak = std::max(voiced_peak, std::abs(v));
  if (voiced_peak > 0.0)
    for (double& v : voiced) v /= voiced_peak;

  // Silence gaps: 200 ms at every 2 s mark, filled with -60 dB dither
  // rather than digital zeros. Frames of exact zeros would pin the log
  // filterbank energies at the floor, where they no longer shift with
  // input gain.
  const std::size_t gap_len = static_cast<std::size_t>(0.2 * fs);
  const std::size_t period = static_cast<std::size_t>(2.0 * fs);
  auto in_gap = [&](std::size_t s) {
    return s >= period && (s % period) < gap_len;
  };

  AudioClip clip;
  clip.speaker_id = profile.speaker_id;
  clip.samples.resize(n);
  const double mix = profile.noise_mix;
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform(-1.0, 1.0);
    clip.samples[s] =
        in_gap(s) ? 1e-3 * u : (1.0 - mix) * voiced[s] + mix * u;
  }

  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double scale = 0.5 / peak;
    for (double& v : clip.samples) v *= scale;
  }
  return clip;
}

}  // namespace ksr
