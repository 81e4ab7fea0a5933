#pragma once

#include <stdexcept>
#include <string>

namespace shocklab {

enum class ErrorCode {
  kOk = 0,
  kDomain = 1,
  kConfig = 2,
  kPrecondition = 3,
  kResolution = 4,
  kH2Violation = 5,
  kD2Violation = 6,
  kNoConnection = 7,
  kManifoldDimension = 8,
  kUnsupported = 9,
  kTrackingLoss = 10,
  kBlowUp = 11,
  kPerturbationTooLarge = 12,
  kIo = 13,
  kIncompleteRun = 14,
  kInput = 15,
  kInternal = 16,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);
const char* error_name(ErrorCode code);

}  // namespace shocklab
