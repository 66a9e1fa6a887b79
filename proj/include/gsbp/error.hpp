#pragma once

#include <stdexcept>
#include <string>

namespace gsbp {

enum class ErrorCode {
  // gaussian arithmetic
  DiracEvaluation,
  InvalidVariance,
  DegenerateOverlap,
  EmptyMixture,
  NormalizationFailure,
  DiracOnGrid,
  EmptyLikelihood,
  // network construction
  DuplicateNodeId,
  UnknownParent,
  UnknownNode,
  ArityMismatch,
  RootWithoutPrior,
  PriorWithParents,
  UndirectedCycle,
  DirectedCycle,
  // inference
  ContradictoryEvidence,
  // fitting
  InvalidTarget,
  FitDiverged,
  InvalidFunction,
  UnsupportedArity,
  // i/o
  ParseError,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. `node()` names the offending node where one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string node = {})
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        node_(std::move(node)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& node() const noexcept { return node_; }

 private:
  ErrorCode code_;
  std::string node_;
};

}  // namespace gsbp
