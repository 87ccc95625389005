#pragma once

#include <stdexcept>
#include <string>

namespace phaseret {

// Shape mismatch between tensors, fields or images.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid parameter value (non-positive wavelength, bad stride, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical kernel produced a NaN/Inf. Never swallowed.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phaseret
