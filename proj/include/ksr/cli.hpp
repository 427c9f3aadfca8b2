#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ksr/error.hpp"
#include "ksr/harness.hpp"
#include "ksr/synth.hpp"

namespace ksr {

enum class Command {
  SYNTH,
  TRAIN_UBM,
  ENROLL,
  VERIFY,
  IDENTIFY,
  SUBBAND_SWEEP,
  FULLBAND_EVAL,
};

struct RunConfig {
  Command command = Command::SYNTH;
  std::filesystem::path manifest_path;
  std::filesystem::path output_dir;
  SystemKind system = SystemKind::GMM_SVM;
  std::size_t k = 64;
  double relevance_r = 16.0;
  double c_param = 1.0;
  BandMode band_mode = BandMode::fullband();
  Grouping grouping = Grouping::SCHOOL;
  std::uint64_t seed = 0;
  unsigned threads = default_thread_count();
  bool dump_features = false;
  // synth-only settings
  std::size_t n_speakers = 30;
  std::size_t utterances_per_speaker = 10;
  double utterance_duration_s = 8.0;
};

namespace cli_detail {

inline const std::map<std::string, Command>& command_table() {
  static const std::map<std::string, Command> table = {
      {"synth", Command::SYNTH},
      {"train-ubm", Command::TRAIN_UBM},
      {"enroll", Command::ENROLL},
      {"verify", Command::VERIFY},
      {"identify", Command::IDENTIFY},
      {"subband-sweep", Command::SUBBAND_SWEEP},
      {"fullband-eval", Command::FULLBAND_EVAL},
  };
  return table;
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "manifest", "out",      "system",     "k",
      "relevance", "c",       "band",       "grouping",
      "seed",     "threads",  "config",     "dump-features",
      "speakers", "utterances", "duration",
  };
  return keys;
}

inline bool is_known_key(const std::string& key) {
  for (const auto& k : known_keys())
    if (k == key) return true;
  return false;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    fail(ErrorCode::UsageError, "--" + key + ": expected integer, got '" + value + "'");
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::UsageError, "--" + key + ": expected number, got '" + value + "'");
  }
}

/// Flat key=value config file; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::UsageError, "cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::UsageError, path.string() + ":" + std::to_string(line_no) +
                                      ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!is_known_key(key) || key == "config")
      fail(ErrorCode::UsageError,
           path.string() + ":" + std::to_string(line_no) + ": unknown key '" +
               key + "'");
    kv[key] = value;
  }
  return kv;
}

}  // namespace cli_detail

inline const char* usage_text() {
  return
      "usage: ksr <command> [--flag value ...]\n"
      "\n"
      "commands:\n"
      "  synth          generate a synthetic speaker corpus (WAVs + manifest)\n"
      "  train-ubm      train the universal background model\n"
      "  enroll         build per-speaker models from a trained UBM\n"
      "  verify         run verification trials and report the EER\n"
      "  identify       run closed-set identification\n"
      "  subband-sweep  verification + identification on all 21 sub-bands\n"
      "  fullband-eval  full-band evaluation (school/age-groups/classroom)\n"
      "\n"
      "flags:\n"
      "  --manifest FILE   utterance manifest CSV\n"
      "  --out DIR         output directory (models, reports, WAVs)\n"
      "  --system S        gmm-svm | gmm-ubm            (default gmm-svm)\n"
      "  --k N             GMM components, power of two  (default 64)\n"
      "  --relevance R     MAP relevance factor          (default 16)\n"
      "  --c C             SVM C parameter               (default 1)\n"
      "  --band B          full | 1..21                  (default full)\n"
      "  --grouping G      school | age-groups | classroom (default school)\n"
      "  --seed N          RNG seed (required)\n"
      "  --threads N       worker threads (default: hardware)\n"
      "  --config FILE     flat key=value config; flags take precedence\n"
      "  --dump-features   write per-utterance feature files under out/\n"
      "  --speakers N      synth: number of speakers     (default 30)\n"
      "  --utterances N    synth: utterances per speaker (default 10)\n"
      "  --duration S      synth: utterance seconds      (default 8)\n";
}

/// Parses argv-style arguments (without the program name). Flags override
/// config-file keys, which override defaults. Unknown keys are rejected.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty())
    fail(ErrorCode::UsageError, "missing command; see usage");
  const auto& commands = cli_detail::command_table();
  const auto cmd_it = commands.find(args[0]);
  if (cmd_it == commands.end())
    fail(ErrorCode::UsageError, "unknown command '" + args[0] + "'");

  std::map<std::string, std::string> cli_kv;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string arg = args[i];
    if (arg.rfind("--", 0) != 0)
      fail(ErrorCode::UsageError, "unexpected argument '" + arg + "'");
    arg.erase(0, 2);
    std::string key = arg, value;
    bool have_value = false;
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      key = arg.substr(0, eq);
      value = arg.substr(eq + 1);
      have_value = true;
    }
    if (!cli_detail::is_known_key(key))
      fail(ErrorCode::UsageError, "unknown flag '--" + key + "'");
    if (!have_value) {
      if (key == "dump-features") {
        value = "true";
      } else {
        if (i + 1 >= args.size())
          fail(ErrorCode::UsageError, "--" + key + " needs a value");
        value = args[++i];
      }
    }
    if (cli_kv.count(key))
      fail(ErrorCode::UsageError, "--" + key + " given twice");
    cli_kv[key] = value;
  }

  std::map<std::string, std::string> effective = cli_kv;
  if (const auto cfg = cli_kv.find("config"); cfg != cli_kv.end()) {
    for (const auto& [key, value] : cli_detail::read_config_file(cfg->second))
      effective.emplace(key, value);  // flags keep precedence
  }

  RunConfig config;
  config.command = cmd_it->second;

  auto get = [&](const char* key) -> const std::string* {
    const auto it = effective.find(key);
    return it == effective.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("manifest")) config.manifest_path = *v;
  if (const auto* v = get("out")) config.output_dir = *v;
  if (const auto* v = get("system")) {
    if (*v == "gmm-svm") config.system = SystemKind::GMM_SVM;
    else if (*v == "gmm-ubm") config.system = SystemKind::GMM_UBM;
    else fail(ErrorCode::UsageError, "--system must be gmm-svm or gmm-ubm");
  }
  if (const auto* v = get("k")) {
    config.k = cli_detail::parse_u64("k", *v);
    if (config.k == 0 || (config.k & (config.k - 1)) != 0)
      fail(ErrorCode::UsageError,
           "--k must be a power of two, got " + std::to_string(config.k));
  }
  if (const auto* v = get("relevance")) {
    config.relevance_r = cli_detail::parse_double("relevance", *v);
    if (config.relevance_r < 0)
      fail(ErrorCode::UsageError, "--relevance must be >= 0");
  }
  if (const auto* v = get("c")) {
    config.c_param = cli_detail::parse_double("c", *v);
    if (!(config.c_param > 0)) fail(ErrorCode::UsageError, "--c must be positive");
  }
  if (const auto* v = get("band")) {
    if (*v == "full") {
      config.band_mode = BandMode::fullband();
    } else {
      const auto n = cli_detail::parse_u64("band", *v);
      if (n < 1 || n > 21)
        fail(ErrorCode::UsageError, "--band must be 'full' or 1..21");
      config.band_mode = BandMode::subband(static_cast<int>(n));
    }
  }
  if (const auto* v = get("grouping")) {
    if (*v == "age-groups") config.grouping = Grouping::AGE_GROUPS;
    else if (*v == "classroom") config.grouping = Grouping::CLASSROOM;
    else if (*v == "school") config.grouping = Grouping::SCHOOL;
    else
      fail(ErrorCode::UsageError,
           "--grouping must be school, age-groups or classroom");
  }
  if (const auto* v = get("seed")) config.seed = cli_detail::parse_u64("seed", *v);
  else fail(ErrorCode::UsageError, "--seed is required");
  if (const auto* v = get("threads")) {
    config.threads = static_cast<unsigned>(cli_detail::parse_u64("threads", *v));
    if (config.threads == 0) fail(ErrorCode::UsageError, "--threads must be >= 1");
  }
  if (const auto* v = get("dump-features")) {
    if (*v == "true" || *v == "1") config.dump_features = true;
    else if (*v == "false" || *v == "0") config.dump_features = false;
    else fail(ErrorCode::UsageError, "--dump-features must be true or false");
  }
  if (const auto* v = get("speakers")) {
    config.n_speakers = cli_detail::parse_u64("speakers", *v);
    if (config.n_speakers == 0) fail(ErrorCode::UsageError, "--speakers must be >= 1");
  }
  if (const auto* v = get("utterances")) {
    config.utterances_per_speaker = cli_detail::parse_u64("utterances", *v);
    if (config.utterances_per_speaker == 0)
      fail(ErrorCode::UsageError, "--utterances must be >= 1");
  }
  if (const auto* v = get("duration")) {
    config.utterance_duration_s = cli_detail::parse_double("duration", *v);
    if (!(config.utterance_duration_s > 0))
      fail(ErrorCode::UsageError, "--duration must be positive");
  }

  if (config.output_dir.empty())
    fail(ErrorCode::UsageError, "--out is required");
  if (config.command != Command::SYNTH && config.manifest_path.empty())
    fail(ErrorCode::UsageError, "--manifest is required for this command");
  return config;
}

namespace cli_detail {

inline std::string zero_pad(std::size_t value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

inline GradeGroup synth_group(std::size_t speaker_index) {
  switch (speaker_index % 3) {
    case 0: return GradeGroup::AG1;
    case 1: return GradeGroup::AG2;
    default: return GradeGroup::AG3;
  }
}

inline void run_synth(const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir / "wav");

  std::vector<UtteranceRecord> records;
  const std::size_t n_enroll = std::max<std::size_t>(
      1, static_cast<std::size_t>(0.7 * static_cast<double>(
                                            config.utterances_per_speaker) +
                                  0.5));
  for (std::size_t s = 0; s < config.n_speakers; ++s) {
    const std::string speaker_id = "spk" + zero_pad(s, 3);
    const auto profile = make_speaker_profile(speaker_id, config.seed);
    for (std::size_t u = 0; u < config.utterances_per_speaker; ++u) {
      AudioClip clip =
          synth_utterance(profile, config.utterance_duration_s, u);
      const std::string utterance_id = speaker_id + "_u" + zero_pad(u, 2);
      clip.utterance_id = utterance_id;
      const std::string rel_path = "wav/" + utterance_id + ".wav";
      write_wav(config.output_dir / rel_path, clip);

      UtteranceRecord rec;
      rec.utterance_id = utterance_id;
      rec.speaker_id = speaker_id;
      rec.grade_group = synth_group(s);
      rec.split = u < n_enroll ? Split::ENROLL : Split::TEST;
      rec.path = rel_path;
      records.push_back(std::move(rec));
    }
  }
  save_manifest(config.output_dir / "manifest.csv", records);
  std::cout << "wrote " << records.size() << " utterances for "
            << config.n_speakers << " speakers under "
            << config.output_dir.string() << "\n";
}

inline EvalParams eval_params(const RunConfig& config) {
  EvalParams params;
  params.k = config.k;
  params.relevance_r = config.relevance_r;
  params.c_param = config.c_param;
  params.seed = config.seed;
  params.threads = config.threads;
  return params;
}

inline AssembledCorpus load_corpus(const RunConfig& config) {
  if (!std::filesystem::exists(config.manifest_path))
    fail(ErrorCode::IoError,
         "manifest not found: " + config.manifest_path.string());
  const auto records = load_manifest(config.manifest_path);
  AssembledCorpus corpus = assemble_corpus(records, config.manifest_path);
  for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  if (corpus.speakers.empty())
    fail(ErrorCode::InsufficientData, "no usable speakers in manifest");
  return corpus;
}

inline std::string safe_filename(std::string id) {
  for (char& c : id)
    if (c == ':' || c == '/' || c == '\\') c = '_';
  return id;
}

inline void dump_corpus_features(const RunConfig& config,
                                 const AssembledCorpus& corpus,
                                 const CorpusFeatureCache& cache) {
  if (!config.dump_features) return;
  namespace fs = std::filesystem;
  const fs::path dir =
      config.output_dir / "features" / config.band_mode.label();
  fs::create_directories(dir);
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    const auto& spk = corpus.speakers[s];
    if (cache.has_enrollment)
      save_features(dir / (safe_filename(spk.enrollment.utterance_id) + ".ksfv"),
                    features_from_energies(cache.enrollment[s], config.band_mode));
    if (cache.has_tests)
      for (std::size_t u = 0; u < spk.tests.size(); ++u)
        save_features(
            dir / (safe_filename(spk.tests[u].utterance_id) + ".ksfv"),
            features_from_energies(cache.tests[s][u], config.band_mode));
  }
}

inline void run_train_ubm(const RunConfig& config) {
  const AssembledCorpus corpus = load_corpus(config);
  const CorpusFeatureCache cache =
      build_feature_cache(corpus, true, false, false, config.threads);
  dump_corpus_features(config, corpus, cache);

  std::vector<FeatureMatrix> enroll_feats;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s)
    enroll_feats.push_back(
        features_from_energies(cache.enrollment[s], config.band_mode));
  const DiagGmm ubm = train_population_ubm(enroll_feats, eval_params(config));

  std::filesystem::create_directories(config.output_dir);
  save_gmm(config.output_dir / "ubm.ksgm", ubm);
  std::cout << "trained UBM: k=" << ubm.k << " dim=" << ubm.dim << " on "
            << corpus.speakers.size() << " speakers\n";
}

inline DiagGmm load_ubm_or_fail(const RunConfig& config) {
  const auto path = config.output_dir / "ubm.ksgm";
  if (!std::filesystem::exists(path))
    fail(ErrorCode::IoError, "UBM model not found: " + path.string());
  return load_gmm(path);
}

inline void run_enroll(const RunConfig& config) {
  const AssembledCorpus corpus = load_corpus(config);
  const bool svm = config.system == SystemKind::GMM_SVM;
  const CorpusFeatureCache cache =
      build_feature_cache(corpus, true, svm, false, config.threads);
  dump_corpus_features(config, corpus, cache);
  const DiagGmm ubm = load_ubm_or_fail(config);
  const EvalParams params = eval_params(config);

  std::vector<std::string> speaker_ids;
  std::vector<FeatureMatrix> enroll_feats;
  std::vector<std::array<FeatureMatrix, 3>> third_feats;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    speaker_ids.push_back(corpus.speakers[s].speaker_id);
    enroll_feats.push_back(
        features_from_energies(cache.enrollment[s], config.band_mode));
    if (svm) {
      std::array<FeatureMatrix, 3> thirds;
      for (std::size_t seg = 0; seg < 3; ++seg)
        thirds[seg] =
            features_from_energies(cache.thirds[s][seg], config.band_mode);
      third_feats.push_back(std::move(thirds));
    }
  }

  const SpeakerModels models = enroll_population(
      speaker_ids, ubm, enroll_feats, third_feats, config.system, params);

  const auto models_dir = config.output_dir / "models";
  std::filesystem::create_directories(models_dir);
  for (std::size_t s = 0; s < speaker_ids.size(); ++s) {
    if (svm)
      save_svm(models_dir / (speaker_ids[s] + ".ksvm"), models.svms[s]);
    else
      save_gmm(models_dir / (speaker_ids[s] + ".ksgm"), models.gmms[s]);
  }
  std::cout << "enrolled " << speaker_ids.size() << " speakers ("
            << to_string(config.system) << ")\n";
}

inline SpeakerModels load_models_or_fail(const RunConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir = config.output_dir / "models";
  const bool svm = config.system == SystemKind::GMM_SVM;
  const std::string ext = svm ? ".ksvm" : ".ksgm";

  SpeakerModels models;
  models.system = config.system;
  if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ext)
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      models.speaker_ids.push_back(file.stem().string());
      if (svm) models.svms.push_back(load_svm(file));
      else models.gmms.push_back(load_gmm(file));
    }
  }
  if (models.speaker_ids.empty())
    fail(ErrorCode::IoError,
         "speaker model not found: no " + ext + " files under " + dir.string());
  return models;
}

inline void run_verify(const RunConfig& config) {
  const AssembledCorpus corpus = load_corpus(config);
  const CorpusFeatureCache cache =
      build_feature_cache(corpus, false, false, true, config.threads);
  dump_corpus_features(config, corpus, cache);
  const DiagGmm ubm = load_ubm_or_fail(config);
  const SpeakerModels models = load_models_or_fail(config);
  const EvalParams params = eval_params(config);

  const PopulationResult result =
      score_population(corpus, all_speaker_indices(corpus), cache, models, ubm,
                       config.band_mode, params);

  write_scores_csv(config.output_dir / "scores.csv", result.scores);
  EvalReport report;
  report.system = config.system;
  report.band_mode = config.band_mode;
  report.label = "VERIFY";
  report.eer_percent = result.eer_percent;
  report.id_accuracy_percent = result.id_accuracy_percent;
  report.n_trials = result.n_trials;
  report.seed = config.seed;
  write_report_csv(config.output_dir / "report.csv", {report});
  std::cout << "EER: " << result.eer_percent << "% over " << result.n_trials
            << " trials\n";
}

inline void run_identify(const RunConfig& config) {
  const AssembledCorpus corpus = load_corpus(config);
  const CorpusFeatureCache cache =
      build_feature_cache(corpus, false, false, true, config.threads);
  dump_corpus_features(config, corpus, cache);
  const DiagGmm ubm = load_ubm_or_fail(config);
  const SpeakerModels models = load_models_or_fail(config);
  const EvalParams params = eval_params(config);

  const PopulationResult result =
      score_population(corpus, all_speaker_indices(corpus), cache, models, ubm,
                       config.band_mode, params);

  write_decisions_csv(config.output_dir / "identify.csv", result.decisions);
  std::cout << "identification accuracy: " << result.id_accuracy_percent
            << "% over " << result.decisions.size() << " test utterances\n";
}

inline void run_subband_sweep(const RunConfig& config) {
  const AssembledCorpus corpus = load_corpus(config);
  const bool svm = config.system == SystemKind::GMM_SVM;
  const CorpusFeatureCache cache =
      build_feature_cache(corpus, true, svm, true, config.threads);
  const EvalParams params = eval_params(config);

  const EvalReport report = subband_sweep(corpus, cache, config.system, params);
  std::filesystem::create_directories(config.output_dir);
  write_sweep_csv(config.output_dir / "sweep.csv", report);
  write_report_csv(config.output_dir / "report.csv", {report});
  std::cout << "sweep complete: best EER " << report.eer_percent
            << "%, best ID " << report.id_accuracy_percent << "% ("
            << report.per_subband_rows.size() << " sub-bands)\n";
}

inline void run_fullband_eval(const RunConfig& config) {
  const AssembledCorpus corpus = load_corpus(config);
  const bool svm = config.system == SystemKind::GMM_SVM;
  const CorpusFeatureCache cache =
      build_feature_cache(corpus, true, svm, true, config.threads);
  dump_corpus_features(config, corpus, cache);
  const EvalParams params = eval_params(config);

  std::vector<PopulationResult> results;
  const auto reports = fullband_eval(corpus, cache, config.system,
                                     config.grouping, params, &results);
  std::filesystem::create_directories(config.output_dir);
  write_report_csv(config.output_dir / "report.csv", reports);
  if (config.grouping == Grouping::SCHOOL && results.size() == 1) {
    write_scores_csv(config.output_dir / "scores.csv", results[0].scores);
    write_decisions_csv(config.output_dir / "identify.csv",
                        results[0].decisions);
  }
  for (const auto& rep : reports)
    std::cout << rep.label << ": EER " << rep.eer_percent << "%, ID "
              << rep.id_accuracy_percent << "% (" << rep.n_trials
              << " trials)\n";
}

}  // namespace cli_detail

/// Dispatches a parsed config. Returns 0 on success, 1 on pipeline
/// failure, 2 on usage errors.
inline int run(const RunConfig& config) {
  try {
    std::filesystem::create_directories(config.output_dir);
    switch (config.command) {
      case Command::SYNTH: cli_detail::run_synth(config); break;
      case Command::TRAIN_UBM: cli_detail::run_train_ubm(config); break;
      case Command::ENROLL: cli_detail::run_enroll(config); break;
      case Command::VERIFY: cli_detail::run_verify(config); break;
      case Command::IDENTIFY: cli_detail::run_identify(config); break;
      case Command::SUBBAND_SWEEP: cli_detail::run_subband_sweep(config); break;
      case Command::FULLBAND_EVAL: cli_detail::run_fullband_eval(config); break;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && (args[0] == "--help" || args[0] == "-h" ||
                        args[0] == "help")) {
    std::cout << usage_text();
    return 0;
  }
  RunConfig config;
  try {
    config = parse_config(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << usage_text();
    return 2;
  }
  return run(config);
}

}  // namespace ksr
