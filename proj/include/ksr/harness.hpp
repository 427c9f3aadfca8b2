#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/error.hpp"
#include "ksr/eval.hpp"
#include "ksr/features.hpp"
#include "ksr/gmm.hpp"
#include "ksr/manifest.hpp"
#include "ksr/segments.hpp"
#include "ksr/svm.hpp"
#include "ksr/threading.hpp"
#include "ksr/wav.hpp"

namespace ksr {

enum class Grouping { AGE_GROUPS, CLASSROOM, SCHOOL };

inline const char* to_string(Grouping g) {
  switch (g) {
    case Grouping::AGE_GROUPS: return "age-groups";
    case Grouping::CLASSROOM: return "classroom";
    case Grouping::SCHOOL: return "school";
  }
  return "school";
}

inline constexpr std::size_t kClassroomSize = 30;
inline constexpr int kClassroomRepeats = 4;

struct SpeakerData {
  std::string speaker_id;
  GradeGroup group = GradeGroup::UNKNOWN;
  AudioClip enrollment;
  std::vector<AudioClip> tests;
};

struct AssembledCorpus {
  std::vector<SpeakerData> speakers;  // sorted by speaker_id
  std::vector<std::string> warnings;  // skipped speakers etc.
};

/// Groups manifest records per speaker (enrollment rows first, manifest
/// order within each split), loads the audio and cuts enrollment/test
/// segments. Speakers without enough speech are skipped with a warning,
/// mirroring the corpus rule that drops under-resourced speakers.
template <typename ClipLoader>
AssembledCorpus assemble_corpus_with(const std::vector<UtteranceRecord>& records,
                                     ClipLoader&& load_clip) {
  struct PerSpeaker {
    std::vector<const UtteranceRecord*> enroll_rows;
    std::vector<const UtteranceRecord*> test_rows;
    GradeGroup group = GradeGroup::UNKNOWN;
    bool group_set = false;
  };
  std::map<std::string, PerSpeaker> by_speaker;  // ordered -> sorted output
  for (const auto& rec : records) {
    auto& entry = by_speaker[rec.speaker_id];
    if (!entry.group_set) {
      entry.group = rec.grade_group;
      entry.group_set = true;
    } else if (entry.group != rec.grade_group) {
      fail(ErrorCode::ParseError,
           "speaker '" + rec.speaker_id + "' has conflicting grade_group labels");
    }
    (rec.split == Split::ENROLL ? entry.enroll_rows : entry.test_rows)
        .push_back(&rec);
  }

  AssembledCorpus corpus;
  for (auto& [speaker_id, entry] : by_speaker) {
    std::vector<AudioClip> clips;
    for (const auto* rec : entry.enroll_rows) clips.push_back(load_clip(*rec));
    for (const auto* rec : entry.test_rows) clips.push_back(load_clip(*rec));
    for (auto& clip : clips) clip.speaker_id = speaker_id;

    try {
      SegmentSplit split = split_segments(clips);
      SpeakerData data;
      data.speaker_id = speaker_id;
      data.group = entry.group;
      data.enrollment = std::move(split.enrollment);
      data.tests = std::move(split.tests);
      if (data.tests.empty())
        corpus.warnings.push_back("speaker '" + speaker_id +
                                  "': enrollment only, no 10 s test chunk");
      corpus.speakers.push_back(std::move(data));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientData) throw;
      corpus.warnings.push_back("speaker '" + speaker_id + "' skipped: " +
                                e.what());
    }
  }
  return corpus;
}

inline AssembledCorpus assemble_corpus(const std::vector<UtteranceRecord>& records,
                                       const std::filesystem::path& manifest_path) {
  return assemble_corpus_with(records, [&](const UtteranceRecord& rec) {
    AudioClip clip = read_wav(resolve_utterance_path(manifest_path, rec.path));
    clip.utterance_id = rec.utterance_id;
    return clip;
  });
}

/// Band-independent per-speaker front-end cache: SAD, spectra and the 24
/// log filterbank energies are computed once; each band mode only reruns
/// the cepstral transform and CMVN.
struct CorpusFeatureCache {
  std::vector<EnergyMatrix> enrollment;               // per speaker
  std::vector<std::array<EnergyMatrix, 3>> thirds;    // per speaker, may be empty
  std::vector<std::vector<EnergyMatrix>> tests;       // per speaker
  bool has_enrollment = false;
  bool has_thirds = false;
  bool has_tests = false;
};

inline CorpusFeatureCache build_feature_cache(const AssembledCorpus& corpus,
                                              bool need_enrollment,
                                              bool need_thirds, bool need_tests,
                                              unsigned threads = 1) {
  CorpusFeatureCache cache;
  const std::size_t n = corpus.speakers.size();
  cache.enrollment.resize(need_enrollment ? n : 0);
  cache.thirds.resize(need_thirds ? n : 0);
  cache.tests.resize(need_tests ? n : 0);
  cache.has_enrollment = need_enrollment;
  cache.has_thirds = need_thirds;
  cache.has_tests = need_tests;

  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const SpeakerData& spk = corpus.speakers[s];
      if (need_enrollment)
        cache.enrollment[s] = compute_energy_matrix(spk.enrollment);
      if (need_thirds) {
        const auto parts = split_enrollment_thirds(spk.enrollment);
        for (std::size_t seg = 0; seg < 3; ++seg)
          cache.thirds[s][seg] = compute_energy_matrix(parts[seg]);
      }
      if (need_tests) {
        cache.tests[s].resize(spk.tests.size());
        for (std::size_t u = 0; u < spk.tests.size(); ++u)
          cache.tests[s][u] = compute_energy_matrix(spk.tests[u]);
      }
    }
  });
  return cache;
}

struct EvalParams {
  std::size_t k = 64;
  double relevance_r = 16.0;
  double c_param = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  GmmTrainOptions gmm;
  SvmTrainOptions svm;
};

/// Enrolled model set for one population, either back-end.
struct SpeakerModels {
  SystemKind system = SystemKind::GMM_SVM;
  std::vector<std::string> speaker_ids;
  std::vector<DiagGmm> gmms;          // GMM_UBM back-end
  std::vector<LinearSvmModel> svms;   // GMM_SVM back-end
};

inline FeatureMatrix pool_features(const std::vector<FeatureMatrix>& parts) {
  FeatureMatrix pooled;
  if (parts.empty()) return pooled;
  pooled.band_mode = parts.front().band_mode;
  pooled.dim = parts.front().dim;
  for (const auto& p : parts) pooled.n_frames += p.n_frames;
  pooled.values.reserve(pooled.n_frames * pooled.dim);
  for (const auto& p : parts)
    pooled.values.insert(pooled.values.end(), p.values.begin(), p.values.end());
  pooled.normalized = parts.front().normalized;
  return pooled;
}

/// UBM for a population: EM over the pooled per-speaker enrollment
/// features (each enrollment segment CMVN-normalized on its own).
inline DiagGmm train_population_ubm(const std::vector<FeatureMatrix>& enroll_feats,
                                    const EvalParams& params) {
  const FeatureMatrix pooled = pool_features(enroll_feats);
  GmmTrainOptions opts = params.gmm;
  opts.threads = params.threads;
  return train_ubm(pooled, params.k, params.seed, opts);
}

inline SpeakerModels enroll_population(
    const std::vector<std::string>& speaker_ids, const DiagGmm& ubm,
    const std::vector<FeatureMatrix>& enroll_feats,
    const std::vector<std::array<FeatureMatrix, 3>>& third_feats,
    SystemKind system, const EvalParams& params) {
  SpeakerModels models;
  models.system = system;
  models.speaker_ids = speaker_ids;
  const std::size_t n = speaker_ids.size();

  if (system == SystemKind::GMM_UBM) {
    models.gmms.resize(n);
    parallel_for(n, params.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t s = begin; s < end; ++s) {
        const auto stats = accumulate_stats(ubm, enroll_feats[s]);
        models.gmms[s] = map_adapt(ubm, stats, params.relevance_r);
      }
    });
    return models;
  }

  // GMM-SVM: three supervectors per speaker, then one-vs-rest training
  // with every other speaker's supervectors as the background class.
  std::vector<std::array<Supervector, 3>> svs(n);
  parallel_for(n, params.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t seg = 0; seg < 3; ++seg) {
        const auto stats = accumulate_stats(ubm, third_feats[s][seg]);
        Supervector sv = build_supervector(map_adapt(ubm, stats, params.relevance_r), ubm);
        sv.speaker_id = speaker_ids[s];
        sv.segment_index = static_cast<int>(seg);
        svs[s][seg] = std::move(sv);
      }
    }
  });

  models.svms.resize(n);
  parallel_for(n, params.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      std::vector<Supervector> target(svs[s].begin(), svs[s].end());
      std::vector<Supervector> background;
      background.reserve((n - 1) * 3);
      for (std::size_t o = 0; o < n; ++o) {
        if (o == s) continue;
        background.insert(background.end(), svs[o].begin(), svs[o].end());
      }
      models.svms[s] =
          train_one_vs_rest(target, background, params.c_param, params.svm);
    }
  });
  return models;
}

/// Raw scores of one test utterance against every enrolled model.
inline std::vector<double> score_against_models(const SpeakerModels& models,
                                                const DiagGmm& ubm,
                                                const FeatureMatrix& test_feats,
                                                const EvalParams& params) {
  std::vector<double> scores(models.speaker_ids.size());
  if (models.system == SystemKind::GMM_UBM) {
    for (std::size_t m = 0; m < models.gmms.size(); ++m)
      scores[m] = log_likelihood(models.gmms[m], test_feats);
  } else {
    const auto stats = accumulate_stats(ubm, test_feats);
    Supervector sv = build_supervector(map_adapt(ubm, stats, params.relevance_r), ubm);
    for (std::size_t m = 0; m < models.svms.size(); ++m)
      scores[m] = svm_score(models.svms[m], sv);
  }
  return scores;
}

/// Identification over GMM speaker models (argmax average log-likelihood).
inline std::string identify_gmm(const std::vector<DiagGmm>& models,
                                const std::vector<std::string>& speaker_ids,
                                const FeatureMatrix& test_feats) {
  std::vector<double> scores(models.size());
  for (std::size_t m = 0; m < models.size(); ++m)
    scores[m] = log_likelihood(models[m], test_feats);
  return identify(speaker_ids, max_normalize(scores));
}

/// Identification over per-speaker SVMs (argmax margin score).
inline std::string identify_svm(const std::vector<LinearSvmModel>& models,
                                const std::vector<std::string>& speaker_ids,
                                const Supervector& test_sv) {
  std::vector<double> scores(models.size());
  for (std::size_t m = 0; m < models.size(); ++m)
    scores[m] = svm_score(models[m], test_sv);
  return identify(speaker_ids, max_normalize(scores));
}

struct IdentificationDecision {
  std::string test_utterance_id;
  std::string true_speaker_id;
  std::string decided_speaker_id;
};

struct PopulationResult {
  double eer_percent = 0.0;
  double id_accuracy_percent = 0.0;
  std::size_t n_trials = 0;
  std::vector<ScoreRecord> scores;
  std::vector<IdentificationDecision> decisions;
};

/// Shared verification + identification pass: score every test utterance
/// of the population against every enrolled model, max-normalize per test
/// utterance, read the trial scores off the matrix and take the argmax
/// for identification.
inline PopulationResult score_population(
    const AssembledCorpus& corpus, const std::vector<std::size_t>& member_idx,
    const CorpusFeatureCache& cache, const SpeakerModels& models,
    const DiagGmm& ubm, BandMode band, const EvalParams& params) {
  struct TestRef {
    std::size_t speaker;  // corpus index
    std::size_t chunk;
  };
  std::vector<TestRef> tests;
  std::vector<TestUtterance> test_meta;
  for (std::size_t idx : member_idx) {
    const auto& spk = corpus.speakers[idx];
    for (std::size_t u = 0; u < spk.tests.size(); ++u) {
      tests.push_back({idx, u});
      test_meta.push_back({spk.tests[u].utterance_id, spk.speaker_id});
    }
  }

  const std::size_t n_tests = tests.size();
  std::vector<std::vector<double>> raw(n_tests), norm(n_tests);
  parallel_for(n_tests, params.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const FeatureMatrix feats = features_from_energies(
          cache.tests[tests[t].speaker][tests[t].chunk], band);
      raw[t] = score_against_models(models, ubm, feats, params);
      norm[t] = max_normalize(raw[t]);
    }
  });

  PopulationResult result;
  std::map<std::string, std::size_t> model_index;
  for (std::size_t m = 0; m < models.speaker_ids.size(); ++m)
    model_index[models.speaker_ids[m]] = m;

  const auto trials = generate_trials(test_meta, models.speaker_ids, params.seed);
  std::map<std::string, std::size_t> test_index;
  for (std::size_t t = 0; t < test_meta.size(); ++t)
    test_index[test_meta[t].utterance_id] = t;

  std::vector<double> target_scores, impostor_scores;
  for (const auto& trial : trials) {
    const std::size_t t = test_index.at(trial.test_utterance_id);
    const auto it = model_index.find(trial.model_speaker_id);
    if (it == model_index.end())
      fail(ErrorCode::InvalidArgument,
           "no model for speaker '" + trial.model_speaker_id + "'");
    ScoreRecord rec;
    rec.trial = trial;
    rec.raw_score = raw[t][it->second];
    rec.normalized_score = norm[t][it->second];
    (trial.is_target ? target_scores : impostor_scores)
        .push_back(rec.normalized_score);
    result.scores.push_back(std::move(rec));
  }

  std::size_t correct = 0;
  for (std::size_t t = 0; t < n_tests; ++t) {
    const std::string decided = identify(models.speaker_ids, norm[t]);
    if (decided == test_meta[t].speaker_id) ++correct;
    result.decisions.push_back(
        {test_meta[t].utterance_id, test_meta[t].speaker_id, decided});
  }

  result.n_trials = trials.size();
  result.eer_percent = compute_eer(target_scores, impostor_scores);
  result.id_accuracy_percent =
      n_tests == 0 ? 0.0
                   : 100.0 * static_cast<double>(correct) /
                         static_cast<double>(n_tests);
  return result;
}

/// Trains, enrolls and scores one population end to end.
inline PopulationResult evaluate_population(
    const AssembledCorpus& corpus, const std::vector<std::size_t>& member_idx,
    const CorpusFeatureCache& cache, SystemKind system, BandMode band,
    const EvalParams& params, DiagGmm* ubm_out = nullptr,
    SpeakerModels* models_out = nullptr) {
  if (member_idx.size() < kImpostorsPerTrial + 1)
    fail(ErrorCode::TooFewSpeakers,
         "population has " + std::to_string(member_idx.size()) +
             " speakers, need at least 11");

  std::vector<std::string> speaker_ids;
  std::vector<FeatureMatrix> enroll_feats;
  std::vector<std::array<FeatureMatrix, 3>> third_feats;
  for (std::size_t idx : member_idx) {
    speaker_ids.push_back(corpus.speakers[idx].speaker_id);
    enroll_feats.push_back(features_from_energies(cache.enrollment[idx], band));
    if (system == SystemKind::GMM_SVM) {
      std::array<FeatureMatrix, 3> thirds;
      for (std::size_t seg = 0; seg < 3; ++seg)
        thirds[seg] = features_from_energies(cache.thirds[idx][seg], band);
      third_feats.push_back(std::move(thirds));
    }
  }

  const DiagGmm ubm = train_population_ubm(enroll_feats, params);
  const SpeakerModels models = enroll_population(speaker_ids, ubm, enroll_feats,
                                                 third_feats, system, params);
  PopulationResult result =
      score_population(corpus, member_idx, cache, models, ubm, band, params);
  if (ubm_out) *ubm_out = ubm;
  if (models_out) *models_out = models;
  return result;
}

inline std::vector<std::size_t> all_speaker_indices(const AssembledCorpus& corpus) {
  std::vector<std::size_t> idx(corpus.speakers.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

/// Runs verification and identification on every one of the 21 sub-bands.
/// The report's headline figures are the best row (lowest EER, highest
/// identification rate).
inline EvalReport subband_sweep(const AssembledCorpus& corpus,
                                const CorpusFeatureCache& cache,
                                SystemKind system, const EvalParams& params) {
  EvalReport report;
  report.system = system;
  report.label = "SWEEP";
  report.seed = params.seed;
  report.band_mode = BandMode::subband(1);

  const auto members = all_speaker_indices(corpus);
  const MelFilterbank& fb = filterbank();
  double best_eer = 100.0, best_id = 0.0;
  for (int n = 1; n <= kNumSubBands; ++n) {
    try {
      const BandMode band = BandMode::subband(n);
      const PopulationResult r =
          evaluate_population(corpus, members, cache, system, band, params);
      const SubBandSpec spec = make_subband_spec(n);
      report.per_subband_rows.push_back({n, spec.span_lo_hz(fb),
                                         spec.span_hi_hz(fb), r.eer_percent,
                                         r.id_accuracy_percent});
      report.n_trials += r.n_trials;
      best_eer = std::min(best_eer, r.eer_percent);
      best_id = std::max(best_id, r.id_accuracy_percent);
    } catch (const Error& e) {
      fail(e.code(), "sub-band " + std::to_string(n) + ": " + e.what());
    }
  }
  report.eer_percent = best_eer;
  report.id_accuracy_percent = best_id;
  return report;
}

namespace detail {

inline std::vector<std::size_t> group_members(const AssembledCorpus& corpus,
                                              GradeGroup g) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < corpus.speakers.size(); ++i)
    if (corpus.speakers[i].group == g) idx.push_back(i);
  return idx;
}

}  // namespace detail

/// Full-band evaluation harness. AGE_GROUPS gives one report per grade
/// group; CLASSROOM averages 4 random 30-speaker classes per group;
/// SCHOOL evaluates the whole population at once.
inline std::vector<EvalReport> fullband_eval(
    const AssembledCorpus& corpus, const CorpusFeatureCache& cache,
    SystemKind system, Grouping grouping, const EvalParams& params,
    std::vector<PopulationResult>* results_out = nullptr) {
  const BandMode band = BandMode::fullband();
  std::vector<EvalReport> reports;

  auto make_report = [&](const std::string& label, const PopulationResult& r) {
    EvalReport rep;
    rep.system = system;
    rep.band_mode = band;
    rep.label = label;
    rep.eer_percent = r.eer_percent;
    rep.id_accuracy_percent = r.id_accuracy_percent;
    rep.n_trials = r.n_trials;
    rep.seed = params.seed;
    return rep;
  };

  if (grouping == Grouping::SCHOOL) {
    const PopulationResult r = evaluate_population(
        corpus, all_speaker_indices(corpus), cache, system, band, params);
    reports.push_back(make_report("SCHOOL", r));
    if (results_out) results_out->push_back(r);
    return reports;
  }

  for (const auto& spk : corpus.speakers)
    if (spk.group == GradeGroup::UNKNOWN)
      fail(ErrorCode::InvalidArgument,
           "speaker '" + spk.speaker_id +
               "' has UNKNOWN grade_group; grouped evaluation needs labels");

  const std::array<GradeGroup, 3> groups = {GradeGroup::AG1, GradeGroup::AG2,
                                            GradeGroup::AG3};
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto members = detail::group_members(corpus, groups[g]);
    const std::string group_name = to_string(groups[g]);

    if (grouping == Grouping::AGE_GROUPS) {
      if (members.size() < kImpostorsPerTrial + 1)
        fail(ErrorCode::GroupTooSmall,
             group_name + " has " + std::to_string(members.size()) +
                 " speakers, need at least 11");
      const PopulationResult r =
          evaluate_population(corpus, members, cache, system, band, params);
      reports.push_back(make_report(group_name, r));
      if (results_out) results_out->push_back(r);
      continue;
    }

    // CLASSROOM: 4 random simulated classes of exactly 30, averaged.
    if (members.size() < kClassroomSize)
      fail(ErrorCode::GroupTooSmall,
           group_name + " has " + std::to_string(members.size()) +
               " speakers, need at least " + std::to_string(kClassroomSize));
    double eer_sum = 0.0, id_sum = 0.0;
    std::size_t trials_sum = 0;
    for (int rep = 0; rep < kClassroomRepeats; ++rep) {
      Rng rng(mix_seed(params.seed, 0xc1a5500u + g * 16 + static_cast<unsigned>(rep)));
      auto picks = rng.sample_without_replacement(members.size(), kClassroomSize);
      std::sort(picks.begin(), picks.end());
      std::vector<std::size_t> class_members;
      for (std::size_t p : picks) class_members.push_back(members[p]);
      const PopulationResult r = evaluate_population(corpus, class_members,
                                                     cache, system, band, params);
      eer_sum += r.eer_percent;
      id_sum += r.id_accuracy_percent;
      trials_sum += r.n_trials;
      if (results_out) results_out->push_back(r);
    }
    EvalReport rep_out;
    rep_out.system = system;
    rep_out.band_mode = band;
    rep_out.label = "CLASSROOM(" + group_name + ")";
    rep_out.eer_percent = eer_sum / kClassroomRepeats;
    rep_out.id_accuracy_percent = id_sum / kClassroomRepeats;
    rep_out.n_trials = trials_sum;
    rep_out.seed = params.seed;
    reports.push_back(rep_out);
  }
  return reports;
}

// --- CSV emission -----------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline void write_scores_csv(const std::filesystem::path& path,
                             const std::vector<ScoreRecord>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << "test_utterance_id,model_speaker_id,is_target,raw_score,normalized_score\n";
  for (const auto& rec : records)
    out << rec.trial.test_utterance_id << ',' << rec.trial.model_speaker_id
        << ',' << (rec.trial.is_target ? 1 : 0) << ','
        << detail::format_double(rec.raw_score) << ','
        << detail::format_double(rec.normalized_score) << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline void write_sweep_csv(const std::filesystem::path& path,
                            const EvalReport& report) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << "subband_index,span_lo_hz,span_hi_hz,eer_percent,id_percent\n";
  for (const auto& row : report.per_subband_rows)
    out << row.subband_index << ',' << detail::format_double(row.span_lo_hz)
        << ',' << detail::format_double(row.span_hi_hz) << ','
        << detail::format_double(row.eer_percent) << ','
        << detail::format_double(row.id_percent) << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline void write_report_csv(const std::filesystem::path& path,
                             const std::vector<EvalReport>& reports) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << "label,system,band,eer_percent,id_percent,n_trials,seed\n";
  for (const auto& rep : reports)
    out << rep.label << ',' << to_string(rep.system) << ','
        << rep.band_mode.label() << ',' << detail::format_double(rep.eer_percent)
        << ',' << detail::format_double(rep.id_accuracy_percent) << ','
        << rep.n_trials << ',' << rep.seed << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

inline void write_decisions_csv(const std::filesystem::path& path,
                                const std::vector<IdentificationDecision>& decisions) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << "test_utterance_id,true_speaker_id,decided_speaker_id\n";
  for (const auto& d : decisions)
    out << d.test_utterance_id << ',' << d.true_speaker_id << ','
        << d.decided_speaker_id << "\n";
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace ksr
