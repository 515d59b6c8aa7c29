#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace slelab {

// Invalid arguments are reported with std::invalid_argument. The types below
// carry extra context for the numerical failure modes callers may recover from.

/// Two paths (or a path and a requested resolution) do not share a mesh.
class MeshMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A conformal map was evaluated at one of its branch points.
class SingularInput : public std::runtime_error {
 public:
  explicit SingularInput(const std::string& what, std::optional<std::size_t> stage = std::nullopt)
      : std::runtime_error(stage ? what + " (chain stage " + std::to_string(*stage) + ")" : what),
        stage_(stage) {}

  std::optional<std::size_t> stage() const noexcept { return stage_; }

 private:
  std::optional<std::size_t> stage_;
};

/// A Loewner trajectory came within the swallow radius of the driver.
class SwallowedPoint : public std::runtime_error {
 public:
  SwallowedPoint(const std::string& what, double time)
      : std::runtime_error(what + " (t ~ " + std::to_string(time) + ")"), time_(time) {}

  /// Estimated blow-up time.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Any other numerical breakdown: retries exhausted, step floor reached, ...
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slelab
