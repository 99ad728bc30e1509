#pragma once

#include <stdexcept>
#include <string>

namespace ricci {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: the caller asked for something the contract forbids.
// The CLI maps these to exit code 2, the gateway to HTTP 400.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Failures that are not the caller's fault (I/O, solver breakdown).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

#define RICCI_DEFINE_ERROR(Name, Base) \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  };

RICCI_DEFINE_ERROR(IsolatedNodeError, ValidationError)
RICCI_DEFINE_ERROR(UnreachableError, ValidationError)
RICCI_DEFINE_ERROR(DegenerateWeightsError, ValidationError)
RICCI_DEFINE_ERROR(ParameterError, ValidationError)
RICCI_DEFINE_ERROR(GraphFormatError, ValidationError)
RICCI_DEFINE_ERROR(DisconnectedError, ValidationError)
RICCI_DEFINE_ERROR(MarginalMismatchError, ValidationError)
RICCI_DEFINE_ERROR(CostError, ValidationError)
RICCI_DEFINE_ERROR(OracleScopeError, ValidationError)
RICCI_DEFINE_ERROR(GainError, ValidationError)
RICCI_DEFINE_ERROR(TargetMissingError, ValidationError)
RICCI_DEFINE_ERROR(EstimatorMissingError, ValidationError)
RICCI_DEFINE_ERROR(TargetError, ValidationError)
RICCI_DEFINE_ERROR(ParseError, ValidationError)
RICCI_DEFINE_ERROR(NotFoundError, ValidationError)
RICCI_DEFINE_ERROR(IoError, RuntimeFailure)
RICCI_DEFINE_ERROR(SolverError, RuntimeFailure)

#undef RICCI_DEFINE_ERROR

}  // namespace ricci
