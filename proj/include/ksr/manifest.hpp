#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ksr/error.hpp"

namespace ksr {

enum class GradeGroup { AG1, AG2, AG3, UNKNOWN };
enum class Split { ENROLL, TEST };

inline const char* to_string(GradeGroup g) {
  switch (g) {
    case GradeGroup::AG1: return "AG1";
    case GradeGroup::AG2: return "AG2";
    case GradeGroup::AG3: return "AG3";
    case GradeGroup::UNKNOWN: return "UNKNOWN";
  }
  return "UNKNOWN";
}

inline const char* to_string(Split s) {
  return s == Split::ENROLL ? "ENROLL" : "TEST";
}

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  GradeGroup grade_group = GradeGroup::UNKNOWN;
  Split split = Split::ENROLL;
  std::string path;  // relative paths resolve against the manifest directory
};

inline constexpr const char* kManifestHeader =
    "utterance_id,speaker_id,grade_group,split,path";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

/// Loads the utterance manifest CSV. Header is required; utterance ids must
/// be unique.
inline std::vector<UtteranceRecord> load_manifest(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open manifest " + path.string());

  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::ParseError, path.string() + ":1: empty file, header required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader)
    fail(ErrorCode::ParseError,
         path.string() + ":1: expected header '" + kManifestHeader + "'");

  std::vector<UtteranceRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 5)
      fail(ErrorCode::ParseError,
           where + ": expected 5 fields, got " + std::to_string(fields.size()));

    UtteranceRecord rec;
    rec.utterance_id = fields[0];
    rec.speaker_id = fields[1];
    if (rec.utterance_id.empty())
      fail(ErrorCode::ParseError, where + ": empty utterance_id");
    if (rec.speaker_id.empty())
      fail(ErrorCode::ParseError, where + ": empty speaker_id");

    if (fields[2] == "AG1") rec.grade_group = GradeGroup::AG1;
    else if (fields[2] == "AG2") rec.grade_group = GradeGroup::AG2;
    else if (fields[2] == "AG3") rec.grade_group = GradeGroup::AG3;
    else if (fields[2] == "UNKNOWN") rec.grade_group = GradeGroup::UNKNOWN;
    else
      fail(ErrorCode::ParseError, where + ": bad grade_group '" + fields[2] + "'");

    if (fields[3] == "ENROLL") rec.split = Split::ENROLL;
    else if (fields[3] == "TEST") rec.split = Split::TEST;
    else
      fail(ErrorCode::UnknownSplit, where + ": '" + fields[3] + "'");

    rec.path = fields[4];
    if (rec.path.empty()) fail(ErrorCode::ParseError, where + ": empty path");

    if (!seen_ids.insert(rec.utterance_id).second)
      fail(ErrorCode::DuplicateId,
           where + ": utterance_id '" + rec.utterance_id + "' repeated");
    records.push_back(std::move(rec));
  }
  return records;
}

inline void save_manifest(const std::filesystem::path& path,
                          const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write manifest " + path.string());
  out << kManifestHeader << "\n";
  for (const auto& rec : records) {
    out << rec.utterance_id << ',' << rec.speaker_id << ','
        << to_string(rec.grade_group) << ',' << to_string(rec.split) << ','
        << rec.path << "\n";
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

/// Resolves a manifest-relative utterance path.
inline std::filesystem::path resolve_utterance_path(
    const std::filesystem::path& manifest_path, const std::string& entry) {
  std::filesystem::path p(entry);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace ksr
