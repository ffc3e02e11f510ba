#pragma once

#include <stdexcept>

namespace htl {

// Thrown when a computation cannot meet its stated accuracy contract
// (quadrature tail too large, bisection bracket exhausted, ...). Domain
// violations use std::domain_error, malformed inputs std::invalid_argument.
class accuracy_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace htl
