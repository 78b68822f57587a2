#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qhd {

enum class ErrorKind {
  InvalidArgument,
  NonZeroMean,
  VacuumBreach,
  NonZeroWinding,
  IncompatibleSource,
  NoConvergence,
  StepUnstable,
  MassMismatch,
  InsufficientCadence,
  NotInDecayRegime,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` discriminates the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same kind with extra context appended to the message.
  Error annotate(const std::string& context) const { return Error(kind_, detail_ + " " + context); }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::VacuumBreach: return "VacuumBreach";
    case ErrorKind::NonZeroWinding: return "NonZeroWinding";
    case ErrorKind::IncompatibleSource: return "IncompatibleSource";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::StepUnstable: return "StepUnstable";
    case ErrorKind::MassMismatch: return "MassMismatch";
    case ErrorKind::InsufficientCadence: return "InsufficientCadence";
    case ErrorKind::NotInDecayRegime: return "NotInDecayRegime";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace qhd
