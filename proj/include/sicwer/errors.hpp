#pragma once

#include <stdexcept>
#include <string>

namespace sicwer {

// Argument outside the mathematical domain of an operation (k = 0, sigma <= 0,
// an angle outside [0, pi/2], a non-finite value to round, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Incompatible sizes: m < n, a box of the wrong length, a vector that does not
// match the model.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A vanishing pivot in the QR factorization or a zero diagonal in R.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent Monte-Carlo configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed quantity violated an internal invariant (e.g. a WER outside [0, 1]
// by more than rounding).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class Error>
inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace detail
}  // namespace sicwer
