#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loctime {

enum class ErrorKind {
  NotStochastic,
  NotMixing,
  MeanNotZero,
  DegenerateObservable,
  InvalidArgument,
  BranchAmbiguity,
  NoConvergence,
  VarianceZero,
  ConventionMismatch,
  MemoryCap,
  GridTooCoarse,
  EmptySample,
  ParseError,
  ConfigInvalid,
  ChainRejected,
  AperiodicityRequired,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries one of the kinds above so
// callers (CLI, python bindings, tests) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace loctime
