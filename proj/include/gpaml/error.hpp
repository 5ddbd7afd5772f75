#pragma once

#include <stdexcept>
#include <string>

namespace gpaml {

// Base for all library failures; maps to CLI exit status 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration (unknown key, missing key, unparsable value);
// maps to CLI exit status 2.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or unresolvable input data (CSV cells, schema columns).
struct DataError : Error {
  using Error::Error;
};

// Numerical failure while fitting (degenerate responses, singular matrix).
struct FitError : Error {
  using Error::Error;
};

// The requested cone/reference construction has no feasible scale range.
struct InfeasibleError : Error {
  using Error::Error;
};

}  // namespace gpaml
