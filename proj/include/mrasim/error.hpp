#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrasim {

enum class ErrorCode {
  CrossSubarray,
  TooManyLatched,
  RowOutOfRange,
  UnresolvedCell,
  UndefinedTimingRegime,
  WriteWhileClosed,
  ProtocolViolation,
  MalformedTrace,
  InvalidArity,
  ArityUnavailable,
  ZeroSuccessRate,
  InvalidArgument,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CrossSubarray: return "CrossSubarray";
    case ErrorCode::TooManyLatched: return "TooManyLatched";
    case ErrorCode::RowOutOfRange: return "RowOutOfRange";
    case ErrorCode::UnresolvedCell: return "UnresolvedCell";
    case ErrorCode::UndefinedTimingRegime: return "UndefinedTimingRegime";
    case ErrorCode::WriteWhileClosed: return "WriteWhileClosed";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::InvalidArity: return "InvalidArity";
    case ErrorCode::ArityUnavailable: return "ArityUnavailable";
    case ErrorCode::ZeroSuccessRate: return "ZeroSuccessRate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the simulator carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mrasim
