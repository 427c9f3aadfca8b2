#pragma once

#include <stdexcept>
#include <string>

namespace ksr {

enum class ErrorCode {
  NotWav,
  UnsupportedFormat,
  TruncatedFile,
  ParseError,
  DuplicateId,
  UnknownSplit,
  InvalidProfile,
  InsufficientData,
  TooShort,
  TooFewFrames,
  NonFiniteInput,
  DimMismatch,
  ModelMismatch,
  DegenerateData,
  TooFewSpeakers,
  EmptyScoreSet,
  GroupTooSmall,
  UsageError,
  IoError,
  InvalidArgument,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotWav: return "NotWav";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownSplit: return "UnknownSplit";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::TooFewSpeakers: return "TooFewSpeakers";
    case ErrorCode::EmptyScoreSet: return "EmptyScoreSet";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

/// Toolkit-wide exception; every throwing operation reports one of the
/// ErrorCode values above so callers can branch on the failure kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace ksr
