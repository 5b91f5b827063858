#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dynaboard {

enum class Errc {
  kEmptyWeights,
  kZeroTotal,
  kNegativeWeight,
  kUnknownMetric,
  kUnknownDataset,
  kMissingCap,
  kCapExceeded,
  kMissingCell,
  kTooFewModels,
  kEmptyMrsSet,
  kZeroAmrs,
  kMissingRate,
  kNoModels,
  kUidMismatch,
  kUnknownLabel,
  kEmptyDataset,
  kModelCrashed,
  kProtocolViolation,
  kTimeout,
  kMemoryLimitExceeded,
  kProcessGone,
  kSpawnFailed,
  kIoError,
  kValidationError,
  kParseError,
  kNotFound,
};

std::string_view to_string(Errc code) noexcept;

// Every domain failure surfaces as this exception. `subject` names the
// offending entity (metric id, dataset id, field, uid) when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string subject = {});

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  // The message without the leading error name.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
  std::string subject_;
};

}  // namespace dynaboard
