#pragma once

#include <stdexcept>
#include <string>

namespace subnyq {

enum class Errc {
  NonIntegerSampleCount,
  NonPositiveInput,
  IndexOutOfRange,
  LengthMismatch,
  DopplerOutOfRange,
  SingularCovariance,
  SingularInformation,
  CodeLengthMismatch,
  BandwidthOutOfRange,
  ZeroSignal,
  FactorizationFailure,
  InvalidConfig,
  Io,
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonIntegerSampleCount: return "NonIntegerSampleCount";
    case Errc::NonPositiveInput: return "NonPositiveInput";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DopplerOutOfRange: return "DopplerOutOfRange";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::SingularInformation: return "SingularInformation";
    case Errc::CodeLengthMismatch: return "CodeLengthMismatch";
    case Errc::BandwidthOutOfRange: return "BandwidthOutOfRange";
    case Errc::ZeroSignal: return "ZeroSignal";
    case Errc::FactorizationFailure: return "FactorizationFailure";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  /// True for errors caused by bad user input rather than numerical breakdown.
  bool is_config_error() const noexcept {
    switch (code_) {
      case Errc::NonIntegerSampleCount:
      case Errc::NonPositiveInput:
      case Errc::CodeLengthMismatch:
      case Errc::BandwidthOutOfRange:
      case Errc::InvalidConfig:
        return true;
      default:
        return false;
    }
  }

 private:
  Errc code_;
};

}  // namespace subnyq
