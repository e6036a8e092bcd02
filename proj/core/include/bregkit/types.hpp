#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace bregkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class ErrorCode {
  DomainError,
  CertError,
  NotDifferentiable,
  ConjugateUnavailable,
  UnsupportedFunctional,
  DimensionMismatch,
  RankDeficient,
  NonConvergence,
  MaxIterExceeded,
  NotCertified,
  Infeasible,
  MaxBreakpointsExceeded,
  Degenerate,
  SingularSystem,
  StepFailure,
  NegativeDensity,
  MonotonicityViolation,
  NotMinimizer,
  MeshMismatch,
  EmptySupport,
  TooLarge,
  BoundViolated,
  InvalidArgument,
  IOError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace bregkit
