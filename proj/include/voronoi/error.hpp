#pragma once

#include <stdexcept>
#include <string>

namespace voronoi {

/// Raised when a sequence or function cannot be evaluated: a non-finite
/// term, a zero normaliser, or a read past the end of a finite prefix.
class evaluation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the expression parser.
class parse_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace voronoi
