#pragma once

#include <stdexcept>
#include <string>

namespace cmc {

/// Base class for all library errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad usage: malformed inputs, invalid configuration, broken file formats.
/// Maps to process exit code 1 in the CLI.
struct config_error : error {
  using error::error;
};

/// A domain specification violating its structural invariants.
struct malformed_domain : config_error {
  using config_error::config_error;
};

/// Mathematically out-of-range request or a detected non-existence /
/// certification failure. Maps to process exit code 2 in the CLI.
struct math_error : error {
  using error::error;
};

/// A formula evaluated at a degenerate parameter limit it does not cover.
struct degenerate_error : math_error {
  using math_error::math_error;
};

/// Internal numeric breakdown (lost bracket, non-convergent quadrature).
/// Maps to process exit code 3 in the CLI.
struct numeric_error : error {
  using error::error;
};

}  // namespace cmc
