#pragma once

// Closed-form single-slit maps for square-root drivers and their composition.
//
// For the driver lambda(t) = shift + c sqrt(t), t in [0, tau], the inverse
// Loewner map is
//
//   f(w) = shift + (w - shift - a)^(1 - alpha) (w - shift - b)^alpha
//
// with slit angle alpha pi, alpha = 1/2 - c / (2 sqrt(16 + c^2)), and branch
// points a = -sqrt(tau) (sqrt(16 + c^2) - c) / 2 < 0 < b = sqrt(tau) (sqrt(16 + c^2) + c) / 2.
// The choice (1 - alpha) a + alpha b = 0 gives f(w) = w - 2 tau / w + O(1/w^2),
// i.e. half-plane capacity 2 tau, and the tip f(shift + c sqrt(tau)) is the
// only critical point. Powers use the argument range [0, pi] on closed H.

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "slelab/driver_paths.hpp"
#include "slelab/half_plane.hpp"

namespace slelab {

/// alpha in (0, 1) such that the trace of c sqrt(t) leaves 0 at angle alpha pi.
double slit_angle(double c);

class SlitMapParams {
 public:
  SlitMapParams(double c, double tau, double shift);

  double c() const noexcept { return c_; }
  double tau() const noexcept { return tau_; }
  double shift() const noexcept { return shift_; }
  double alpha() const noexcept { return alpha_; }

  /// Branch points in absolute coordinates (shift + a, shift + b).
  double left_branch() const noexcept { return shift_ + a_; }
  double right_branch() const noexcept { return shift_ + b_; }
  /// Driver value at the end of the block; the preimage of the slit tip.
  double tip_preimage() const noexcept { return shift_ + c_ * std::sqrt(tau_); }
  Complex tip() const noexcept;
  double slit_length() const noexcept { return std::abs(tip() - Complex(shift_)); }

  /// The same block stopped after time s in (0, tau].
  SlitMapParams truncated(double s) const { return {c_, s, shift_}; }

 private:
  double c_;
  double tau_;
  double shift_;
  double alpha_;
  double a_;
  double b_;
};

/// Applies the block map. Throws std::invalid_argument for Im w < 0 and
/// SingularInput at a branch point.
HalfPlanePoint slit_map_inverse(const SlitMapParams& p, HalfPlanePoint w);
Complex slit_map_inverse_derivative(const SlitMapParams& p, HalfPlanePoint w);

/// Blocks in time order covering [0, duration()].
class MapChain {
 public:
  MapChain() = default;
  explicit MapChain(std::vector<SlitMapParams> blocks) : blocks_(std::move(blocks)) {}

  /// One block per coarse interval of a sqrt-interpolated driver.
  static MapChain from_driver(const DriverPath& interpolated);

  std::span<const SlitMapParams> blocks() const noexcept { return blocks_; }
  std::span<const SlitMapParams> prefix(std::size_t k) const { return blocks().first(k); }
  std::size_t size() const noexcept { return blocks_.size(); }
  bool empty() const noexcept { return blocks_.empty(); }
  double duration() const noexcept;
  double total_capacity() const noexcept { return 2.0 * duration(); }

  nlohmann::ordered_json to_json() const;
  static MapChain from_json(const nlohmann::json& j);

 private:
  std::vector<SlitMapParams> blocks_;
};

/// f_1 o f_2 o ... o f_m (w): the last block is applied first.
HalfPlanePoint compose_chain(std::span<const SlitMapParams> blocks, HalfPlanePoint w);
inline HalfPlanePoint compose_chain(const MapChain& chain, HalfPlanePoint w) {
  return compose_chain(chain.blocks(), w);
}

/// Derivative of the composed map by the chain rule. Requires Im w > 0.
Complex map_derivative(std::span<const SlitMapParams> blocks, HalfPlanePoint w);
inline Complex map_derivative(const MapChain& chain, HalfPlanePoint w) {
  return map_derivative(chain.blocks(), w);
}

/// Estimates the 1/w coefficient C of f(w) = w - C/w + ... from evaluations
/// on the imaginary axis at large radius (Richardson-extrapolated in 1/R).
double capacity_coefficient(std::span<const SlitMapParams> blocks, double radius = 1e4);

namespace detail {
/// Unchecked block evaluation for inner loops; w must lie in closed H.
Complex apply_block(const SlitMapParams& p, Complex w) noexcept;
Complex block_derivative(const SlitMapParams& p, Complex w) noexcept;
}  // namespace detail

}  // namespace slelab
