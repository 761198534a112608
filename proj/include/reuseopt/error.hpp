#pragma once

#include <stdexcept>
#include <string>

namespace reuseopt {

enum class ErrorCode {
  Parse,           // malformed input document or CSV row
  Validation,      // well-formed input violating a domain invariant
  Infeasible,      // no assignment meets the latency budget
  MissingModel,    // no trained model for a (kind, target) pair
  CorruptModel,    // model file truncated or damaged
  VersionMismatch, // model file written by an incompatible format version
  Io,
  Evaluation,      // objective evaluator failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reuseopt
