#pragma once

#include <stdexcept>
#include <string>

namespace secflow {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Validation,
  Config,
  Unschedulable,
  Key,
  Training,
  Evaluation,
  Prediction,
  Selection,
  Fitting,
  Assessment,
  Domain,
  NoBackup,
  Io,
};

/// Every failure raised by the core library carries one of the codes above so
/// that the C surface can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace secflow
