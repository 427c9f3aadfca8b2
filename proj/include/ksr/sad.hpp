#pragma once

#include <cstddef>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/dsp.hpp"

namespace ksr {

/// Energy threshold below the loudest frame, in dB.
inline constexpr double kSadThresholdDb = 30.0;

/// Energy-based speech activity detection at frame granularity (20 ms
/// frames, 10 ms hop). A frame passes when its log energy exceeds the
/// maximum frame log energy minus 30 dB; the output clip is the
/// concatenation of all samples covered by at least one passing frame.
/// Returns an empty clip when no frame passes.
inline AudioClip detect_speech(const AudioClip& clip) {
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.utterance_id = clip.utterance_id;
  out.speaker_id = clip.speaker_id;

  const std::size_t count = frame_count(clip.samples.size());
  if (count == 0) return out;

  std::vector<double> energy(count);
  double max_energy = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const double* x = clip.samples.data() + t * kFrameHop;
    double e = 0.0;
    for (std::size_t n = 0; n < kFrameLength; ++n) e += x[n] * x[n];
    energy[t] = e;
    if (e > max_energy) max_energy = e;
  }

  // E > E_max * 10^(-30/10); comparison on linear energies is the same
  // test as on log energies and keeps the all-zero case empty.
  const double threshold = max_energy * 1e-3;

  std::vector<bool> keep_sample(clip.samples.size(), false);
  for (std::size_t t = 0; t < count; ++t) {
    if (energy[t] > threshold) {
      const std::size_t begin = t * kFrameHop;
      for (std::size_t i = begin; i < begin + kFrameLength; ++i)
        keep_sample[i] = true;
    }
  }

  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    if (keep_sample[i]) out.samples.push_back(clip.samples[i]);
  return out;
}

}  // namespace ksr
