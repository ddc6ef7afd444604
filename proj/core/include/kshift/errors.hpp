#pragma once

#include <stdexcept>
#include <string>

namespace kshift {

/// Invalid configuration: bad keys, missing callbacks, out-of-range settings.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed numerical input (non-finite entries, dimension mismatch).
struct DataError : std::invalid_argument {
  explicit DataError(const std::string& what) : std::invalid_argument(what) {}
};

/// A model-level assumption is violated (curvature, admissibility, PSD-ness).
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear system could not be solved to tolerance.
struct SingularSystemError : std::runtime_error {
  explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kshift
