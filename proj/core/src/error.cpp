#include "dynaboard/error.hpp"

namespace dynaboard {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::kEmptyWeights: return "EmptyWeights";
    case Errc::kZeroTotal: return "ZeroTotal";
    case Errc::kNegativeWeight: return "NegativeWeight";
    case Errc::kUnknownMetric: return "UnknownMetric";
    case Errc::kUnknownDataset: return "UnknownDataset";
    case Errc::kMissingCap: return "MissingCap";
    case Errc::kCapExceeded: return "CapExceeded";
    case Errc::kMissingCell: return "MissingCell";
    case Errc::kTooFewModels: return "TooFewModels";
    case Errc::kEmptyMrsSet: return "EmptyMrsSet";
    case Errc::kZeroAmrs: return "ZeroAmrs";
    case Errc::kMissingRate: return "MissingRate";
    case Errc::kNoModels: return "NoModels";
    case Errc::kUidMismatch: return "UidMismatch";
    case Errc::kUnknownLabel: return "UnknownLabel";
    case Errc::kEmptyDataset: return "EmptyDataset";
    case Errc::kModelCrashed: return "ModelCrashed";
    case Errc::kProtocolViolation: return "ProtocolViolation";
    case Errc::kTimeout: return "Timeout";
    case Errc::kMemoryLimitExceeded: return "MemoryLimitExceeded";
    case Errc::kProcessGone: return "ProcessGone";
    case Errc::kSpawnFailed: return "SpawnFailed";
    case Errc::kIoError: return "IoError";
    case Errc::kValidationError: return "ValidationError";
    case Errc::kParseError: return "ParseError";
    case Errc::kNotFound: return "NotFound";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::string subject)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message),
      subject_(std::move(subject)) {}

}  // namespace dynaboard
