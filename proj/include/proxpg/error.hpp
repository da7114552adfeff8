#ifndef PROXPG_ERROR_HPP_
#define PROXPG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace proxpg {

enum class Errc {
  InvalidArgument,
  NotEnumerable,
  InfeasibleConstruction,
  InfeasiblePoint,
  ZeroDensity,
  EmptyRun,
  NumericalDivergence,
  MissingCw,
  StepTooLarge,
  DegenerateL,
  EmptyProbe,
  MismatchedTraces,
  BudgetExceeded,
  ConfigError,
};

std::string_view errc_name(Errc code);

// All library failures are reported through this type; code() identifies
// the condition so callers (the CLI in particular) can map it to exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotEnumerable: return "NotEnumerable";
    case Errc::InfeasibleConstruction: return "InfeasibleConstruction";
    case Errc::InfeasiblePoint: return "InfeasiblePoint";
    case Errc::ZeroDensity: return "ZeroDensity";
    case Errc::EmptyRun: return "EmptyRun";
    case Errc::NumericalDivergence: return "NumericalDivergence";
    case Errc::MissingCw: return "MissingCw";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::DegenerateL: return "DegenerateL";
    case Errc::EmptyProbe: return "EmptyProbe";
    case Errc::MismatchedTraces: return "MismatchedTraces";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace proxpg

#endif  // PROXPG_ERROR_HPP_
