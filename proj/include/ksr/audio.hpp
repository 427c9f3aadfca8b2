#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ksr/error.hpp"

namespace ksr {

inline constexpr int kSampleRateHz = 16000;

/// Mono PCM audio at 16 kHz, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kSampleRateHz;
  std::string utterance_id;
  std::string speaker_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

inline void validate_clip(const AudioClip& clip) {
  if (clip.sample_rate_hz != kSampleRateHz)
    fail(ErrorCode::UnsupportedFormat,
         "sample rate must be 16000 Hz, got " +
             std::to_string(clip.sample_rate_hz));
  for (double s : clip.samples) {
    if (!std::isfinite(s))
      fail(ErrorCode::NonFiniteInput,
           "non-finite sample in clip " + clip.utterance_id);
    if (s < -1.0 || s > 1.0)
      fail(ErrorCode::InvalidArgument,
           "sample out of [-1, 1] in clip " + clip.utterance_id);
  }
}

}  // namespace ksr
