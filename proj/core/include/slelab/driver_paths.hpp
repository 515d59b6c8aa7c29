#pragma once

// Driving functions for the Loewner equation: coupled Brownian samples,
// piecewise square-root interpolation and the discrete modulus of continuity.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace slelab {

enum class DriverKind { raw_brownian, sqrt_interpolated, analytic };

std::string_view to_string(DriverKind kind);
DriverKind driver_kind_from_string(std::string_view name);

struct DriverMeta {
  std::uint64_t seed = 0;
  double kappa = 1.0;
  DriverKind kind = DriverKind::analytic;
  /// Coarse resolution n of a sqrt-interpolated driver (0 otherwise).
  std::size_t knots = 0;
};

/// A real driver sampled on the uniform mesh t_i = i T / n, i = 0..n.
class DriverPath {
 public:
  DriverPath(double horizon, std::vector<double> values, DriverMeta meta);

  std::size_t resolution() const noexcept { return values_.size() - 1; }
  double horizon() const noexcept { return horizon_; }
  double step() const noexcept { return horizon_ / static_cast<double>(resolution()); }
  double time(std::size_t i) const noexcept {
    return horizon_ * static_cast<double>(i) / static_cast<double>(resolution());
  }
  std::vector<double> times() const;

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  const DriverMeta& meta() const noexcept { return meta_; }

  double sup_abs() const noexcept;

 private:
  double horizon_;
  std::vector<double> values_;
  DriverMeta meta_;
};

/// c * sqrt(t) sampled on n intervals of [0, T].
DriverPath sqrt_driver(double c, std::size_t n, double horizon = 1.0);

/// Normal variates from std::mt19937_64 via the Box-Muller transform.
///
/// mt19937_64 is bit-specified by the standard, uniforms take the top 53 bits
/// of each draw, and both Box-Muller outputs are used in order. Unlike
/// std::normal_distribution this sequence does not depend on the standard
/// library implementation.
class NormalGenerator {
 public:
  explicit NormalGenerator(std::uint64_t seed) : engine_(seed) {}
  double operator()();

 private:
  double uniform_open();  // (0, 1]

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// A standard Brownian path B on [0, T] at resolution n.
class BrownianSample {
 public:
  BrownianSample(std::uint64_t seed, double horizon, std::vector<double> increments);

  std::uint64_t seed() const noexcept { return seed_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t resolution() const noexcept { return increments_.size(); }
  std::span<const double> increments() const noexcept { return increments_; }
  /// B(t_i), i = 0..n, with B(0) = 0.
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::uint64_t seed_;
  double horizon_;
  std::vector<double> increments_;
  std::vector<double> values_;
};

BrownianSample sample_brownian(std::uint64_t seed, std::size_t n, double horizon = 1.0);

/// sqrt(kappa) * B on the sample's mesh. One sample, many kappa: the coupling.
DriverPath scale_driver(const BrownianSample& b, double kappa);

/// Piecewise square-root interpolation at the coarse knots t_k = k T / n,
/// resampled on the fine mesh of d. n must divide d.resolution().
DriverPath sqrt_interpolate(const DriverPath& d, std::size_t n);

/// Discrete modulus of continuity: max |d(t) - d(s)| over mesh pairs with
/// |t - s| <= delta.
double osc(const DriverPath& d, double delta);

/// Subpower function phi(n) = (log n)^q.
struct Subpower {
  double q = 1.0;
  double operator()(double n) const;
};

/// One analytic piece lambda(t) = shift + sqrt_coef sqrt(t - t0) + slope (t - t0)
/// on [t0, t1].
struct DriverPiece {
  double t0 = 0.0;
  double t1 = 0.0;
  double shift = 0.0;
  double sqrt_coef = 0.0;
  double slope = 0.0;

  double at(double t) const noexcept;
};

/// Continuous-time view of a driver, used by the ODE integrators.
///
/// Sqrt-interpolated paths become exact square-root pieces between coarse
/// knots; every other path is linear between its mesh points.
class PiecewiseDriver {
 public:
  explicit PiecewiseDriver(std::vector<DriverPiece> pieces);

  static PiecewiseDriver from_path(const DriverPath& d);
  /// shift + c sqrt(t) on [0, T] as a single exact piece.
  static PiecewiseDriver sqrt_block(double c, double horizon, double shift = 0.0);

  std::span<const DriverPiece> pieces() const noexcept { return pieces_; }
  double horizon() const noexcept { return pieces_.back().t1; }
  std::size_t piece_index(double t) const noexcept;
  double operator()(double t) const noexcept { return pieces_[piece_index(t)].at(t); }

 private:
  std::vector<DriverPiece> pieces_;
  bool uniform_ = false;
};

// Serialization: CSV with columns t,value and a JSON manifest.
std::string driver_to_csv(const DriverPath& d);
nlohmann::ordered_json driver_manifest(const DriverPath& d);

}  // namespace slelab
