#pragma once

#include <string>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/error.hpp"
#include "ksr/sad.hpp"

namespace ksr {

inline constexpr std::size_t kEnrollSamples = 48 * kSampleRateHz;  // 48 s
inline constexpr std::size_t kTestSamples = 10 * kSampleRateHz;    // 10 s

struct SegmentSplit {
  AudioClip enrollment;          // exactly 48 s of detected speech
  std::vector<AudioClip> tests;  // consecutive 10 s chunks, possibly empty
};

/// Pools one speaker's clips in the given order, keeps the detected
/// speech of each, and cuts the concatenation greedily: the first 48 s
/// become the enrollment segment, every next full 10 s a test chunk.
/// Leftover speech shorter than 10 s is discarded. Throws
/// InsufficientData when less than 48 s of speech is available.
inline SegmentSplit split_segments(const std::vector<AudioClip>& clips) {
  std::string speaker;
  std::vector<double> speech;
  for (const auto& clip : clips) {
    if (speaker.empty()) speaker = clip.speaker_id;
    else if (!clip.speaker_id.empty() && clip.speaker_id != speaker)
      fail(ErrorCode::InvalidArgument,
           "clips from different speakers: '" + speaker + "' vs '" +
               clip.speaker_id + "'");
    const AudioClip kept = detect_speech(clip);
    speech.insert(speech.end(), kept.samples.begin(), kept.samples.end());
  }

  if (speech.size() < kEnrollSamples)
    fail(ErrorCode::InsufficientData,
         "speaker '" + speaker + "' has " +
             std::to_string(static_cast<double>(speech.size()) / kSampleRateHz) +
             " s of speech, need 48 s for enrollment");

  SegmentSplit split;
  split.enrollment.speaker_id = speaker;
  split.enrollment.utterance_id = speaker + ":enroll";
  split.enrollment.samples.assign(speech.begin(),
                                  speech.begin() + kEnrollSamples);

  std::size_t pos = kEnrollSamples;
  std::size_t index = 0;
  while (speech.size() - pos >= kTestSamples) {
    AudioClip chunk;
    chunk.speaker_id = speaker;
    chunk.utterance_id = speaker + ":t" + std::to_string(index++);
    chunk.samples.assign(speech.begin() + static_cast<std::ptrdiff_t>(pos),
                         speech.begin() + static_cast<std::ptrdiff_t>(pos + kTestSamples));
    split.tests.push_back(std::move(chunk));
    pos += kTestSamples;
  }
  return split;
}

}  // namespace ksr
