#pragma once

#include <stdexcept>
#include <string>

namespace fatigue {

/// Raised when a config, geometry, mesh, or dataset violates a documented
/// constraint. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fatigue
