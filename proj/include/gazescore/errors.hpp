#pragma once

#include <stdexcept>
#include <string>

namespace gazescore {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or rank mismatch between operands.
struct dimension_error : error {
  using error::error;
};

// A tape handle used against the wrong (or reset) recording.
struct record_error : error {
  using error::error;
};

// Invalid argument values or malformed domain state.
struct value_error : error {
  using error::error;
};

// Dataset parsing or schema problems.
struct data_error : error {
  using error::error;
};

// Numerical failure: divergence, singular system, non-finite result.
struct numeric_error : error {
  using error::error;
};

}  // namespace gazescore
