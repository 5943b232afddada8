#pragma once

#include <stdexcept>
#include <string>

namespace factorlens {

// Bad or inconsistent input data, configuration, or files.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical precondition failed at run time (singular or indefinite
// matrix, degenerate statistic, solver breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace factorlens
