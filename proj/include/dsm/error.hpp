#pragma once

#include <stdexcept>
#include <string>

namespace dsm {

// Bad user input: unknown key, malformed value, violated parameter constraint.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The numerics refuse to run, e.g. a grid too coarse for the multiplicative walk.
struct NumericalRefusal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An artifact that a command depends on is absent or stale.
struct MissingArtifact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dsm
