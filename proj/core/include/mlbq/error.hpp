#pragma once

#include <stdexcept>
#include <string>

namespace mlbq {

// Bad input or configuration. The CLI maps this to exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A (factor family, marginal) pair with no closed-form kernel mean.
class UnsupportedPair : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Linear-algebra breakdown. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double last_nugget)
      : NumericalError(what), last_nugget_(last_nugget) {}
  double last_nugget() const noexcept { return last_nugget_; }

 private:
  double last_nugget_;
};

}  // namespace mlbq
