#include "loctime/error.hpp"

namespace loctime {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NotMixing: return "NotMixing";
    case ErrorKind::MeanNotZero: return "MeanNotZero";
    case ErrorKind::DegenerateObservable: return "DegenerateObservable";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::VarianceZero: return "VarianceZero";
    case ErrorKind::ConventionMismatch: return "ConventionMismatch";
    case ErrorKind::MemoryCap: return "MemoryCap";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ChainRejected: return "ChainRejected";
    case ErrorKind::AperiodicityRequired: return "AperiodicityRequired";
  }
  return "Unknown";
}

}  // namespace loctime
