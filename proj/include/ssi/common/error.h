#pragma once

#include <stdexcept>
#include <string>

namespace ssi {

// Bad input: wrong shapes, rates, out-of-range parameters, missing files.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// NaN/Inf produced during a computation, divergence during training.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void Require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace ssi
