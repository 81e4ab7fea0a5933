#include "shocklab/core/error.hpp"

namespace shocklab {

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kPrecondition: return "precondition error";
    case ErrorCode::kResolution: return "numerical-resolution error";
    case ErrorCode::kH2Violation: return "hyperbolicity violation";
    case ErrorCode::kD2Violation: return "mass-basis degeneracy";
    case ErrorCode::kNoConnection: return "no connecting orbit";
    case ErrorCode::kManifoldDimension: return "manifold-dimension error";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kTrackingLoss: return "tracking loss";
    case ErrorCode::kBlowUp: return "blow-up";
    case ErrorCode::kPerturbationTooLarge: return "perturbation too large";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kIncompleteRun: return "incomplete run";
    case ErrorCode::kInput: return "input error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

}  // namespace shocklab
