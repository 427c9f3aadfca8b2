#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ksr/error.hpp"
#include "ksr/features.hpp"
#include "ksr/rng.hpp"

namespace ksr {

struct Trial {
  std::string test_utterance_id;
  std::string model_speaker_id;
  bool is_target = false;
};

struct ScoreRecord {
  Trial trial;
  double raw_score = 0.0;
  double normalized_score = 0.0;
};

struct SubbandRow {
  int subband_index = 0;
  double span_lo_hz = 0.0;
  double span_hi_hz = 0.0;
  double eer_percent = 0.0;
  double id_percent = 0.0;
};

enum class SystemKind { GMM_UBM, GMM_SVM };

inline const char* to_string(SystemKind s) {
  return s == SystemKind::GMM_UBM ? "gmm-ubm" : "gmm-svm";
}

struct EvalReport {
  SystemKind system = SystemKind::GMM_SVM;
  BandMode band_mode;
  std::string label;  // e.g. "SCHOOL", "AG2", "CLASSROOM(AG1)", "SWEEP"
  double eer_percent = 0.0;
  double id_accuracy_percent = 0.0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
  std::vector<SubbandRow> per_subband_rows;
};

/// A test utterance together with its true speaker.
struct TestUtterance {
  std::string utterance_id;
  std::string speaker_id;
};

/// One target trial plus 10 impostor trials per test utterance; impostors
/// are drawn without replacement from the other enrolled speakers with a
/// per-utterance seeded stream.
inline constexpr std::size_t kImpostorsPerTrial = 10;

inline std::vector<Trial> generate_trials(
    const std::vector<TestUtterance>& test_utterances,
    const std::vector<std::string>& enrolled_speakers, std::uint64_t seed) {
  if (enrolled_speakers.size() < kImpostorsPerTrial + 1)
    fail(ErrorCode::TooFewSpeakers,
         "need at least 11 enrolled speakers, got " +
             std::to_string(enrolled_speakers.size()));

  std::vector<Trial> trials;
  trials.reserve(test_utterances.size() * (kImpostorsPerTrial + 1));
  for (const auto& test : test_utterances) {
    trials.push_back({test.utterance_id, test.speaker_id, true});

    std::vector<std::string> candidates;
    candidates.reserve(enrolled_speakers.size());
    for (const auto& s : enrolled_speakers)
      if (s != test.speaker_id) candidates.push_back(s);
    std::sort(candidates.begin(), candidates.end());

    Rng rng(mix_seed(seed, hash_string(test.utterance_id), 0x7e57u));
    const auto picks =
        rng.sample_without_replacement(candidates.size(), kImpostorsPerTrial);
    for (std::size_t idx : picks)
      trials.push_back({test.utterance_id, candidates[idx], false});
  }
  return trials;
}

/// Max-log-likelihood score normalization: subtract the maximum of the
/// set from every score. The argmax never moves.
inline std::vector<double> max_normalize(const std::vector<double>& scores) {
  if (scores.empty())
    fail(ErrorCode::EmptyScoreSet, "max_normalize needs at least one score");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] - top;
  return out;
}

/// Percentage equal error rate. Accept iff score >= threshold;
/// FAR(t) = fraction of impostors >= t, FRR(t) = fraction of targets < t.
/// Thresholds sweep the pooled score set and the EER is read at the
/// FAR/FRR crossing with linear interpolation between the two bracketing
/// operating points.
inline double compute_eer(const std::vector<double>& target_scores,
                          const std::vector<double>& impostor_scores) {
  if (target_scores.empty() || impostor_scores.empty())
    fail(ErrorCode::EmptyScoreSet, "both score sets must be non-empty");

  std::vector<double> thresholds;
  thresholds.reserve(target_scores.size() + impostor_scores.size());
  thresholds.insert(thresholds.end(), target_scores.begin(), target_scores.end());
  thresholds.insert(thresholds.end(), impostor_scores.begin(),
                    impostor_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double n_tgt = static_cast<double>(target_scores.size());
  const double n_imp = static_cast<double>(impostor_scores.size());
  auto far_at = [&](double t) {
    std::size_t count = 0;
    for (double s : impostor_scores) count += (s >= t) ? 1 : 0;
    return static_cast<double>(count) / n_imp;
  };
  auto frr_at = [&](double t) {
    std::size_t count = 0;
    for (double s : target_scores) count += (s < t) ? 1 : 0;
    return static_cast<double>(count) / n_tgt;
  };

  // Operating points in threshold order end with a virtual point above the
  // maximum score (FAR 0, FRR 1), so a crossing always exists. FAR - FRR is
  // non-increasing, so the first sign change brackets the unique EER.
  double prev_far = far_at(thresholds.front());
  double prev_frr = frr_at(thresholds.front());
  if (prev_far <= prev_frr) return 100.0 * prev_far;

  const std::size_t n_points = thresholds.size() + 1;
  for (std::size_t p = 1; p < n_points; ++p) {
    double far, frr;
    if (p < thresholds.size()) {
      far = far_at(thresholds[p]);
      frr = frr_at(thresholds[p]);
    } else {
      far = 0.0;
      frr = 1.0;
    }
    if (far <= frr) {
      if (far == frr) return 100.0 * far;
      // Interpolate between (prev_far, prev_frr) and (far, frr).
      const double num = prev_far - prev_frr;
      const double den = num + (frr - far);
      const double lambda = num / den;
      return 100.0 * (prev_far + lambda * (far - prev_far));
    }
    prev_far = far;
    prev_frr = frr;
  }
  return 100.0 * prev_far;  // unreachable: the virtual point has far <= frr
}

/// Closed-set identification: the highest-scoring model wins; exact ties
/// go to the lexicographically smallest speaker id.
inline std::string identify(const std::vector<std::string>& speaker_ids,
                            const std::vector<double>& scores) {
  if (speaker_ids.empty() || speaker_ids.size() != scores.size())
    fail(ErrorCode::InvalidArgument,
         "identify needs matching non-empty id and score lists");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && speaker_ids[i] < speaker_ids[best]))
      best = i;
  }
  return speaker_ids[best];
}

}  // namespace ksr
