#pragma once

#include <stdexcept>
#include <string>

namespace esnet {

// Error taxonomy, mapped to CLI exit codes in cli.hpp:
//   UsageError         -> 1  (bad flags, bad config values, misuse of an API)
//   DataError          -> 2  (unreadable/corrupt files, shape or grid mismatches)
//   InvariantViolation -> 3  (runtime guarantees broken: energy increase,
//                             nonfinite state, solver step underflow)
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct InvariantViolation : Error {
  using Error::Error;
};

}  // namespace esnet
