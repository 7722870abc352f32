#pragma once

#include <stdexcept>
#include <string>

namespace sle0 {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegreeZero : Error {
  using Error::Error;
};
struct NonRealCoefficients : Error {
  using Error::Error;
};
struct CoincidentPoints : Error {
  using Error::Error;
};
struct StationaryViolated : Error {
  using Error::Error;
};
struct NonGeneric : Error {
  using Error::Error;
};
struct PatternNotFound : Error {
  using Error::Error;
};
struct TraceFailed : Error {
  using Error::Error;
};
struct CrossingPattern : Error {
  using Error::Error;
};
struct UnboundedBranch : Error {
  using Error::Error;
};
struct NoHalfPlaneRoot : Error {
  using Error::Error;
};
struct DeadPoint : Error {
  using Error::Error;
};
struct StepSizeUnderflow : Error {
  using Error::Error;
};
struct OutOfRange : Error {
  using Error::Error;
};
struct InvalidInput : Error {
  using Error::Error;
};

}  // namespace sle0
