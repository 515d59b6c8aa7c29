#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace slelab {

using Complex = std::complex<double>;

/// A point of the closed upper half-plane.
///
/// Construction rejects points below the real axis. Values within a rounding
/// band of the axis (|Im| <= 1e-12 (1 + |z|)) are snapped onto it, so the
/// outputs of conformal maps can be fed back in without spurious failures.
class HalfPlanePoint {
 public:
  constexpr HalfPlanePoint() = default;
  HalfPlanePoint(double re, double im) : HalfPlanePoint(Complex(re, im)) {}
  HalfPlanePoint(Complex z) : z_(z) {  // NOLINT: implicit by intent
    if (!(z_.imag() >= 0.0)) {
      if (std::isfinite(z_.imag()) && -z_.imag() <= 1e-12 * (1.0 + std::abs(z_))) {
        z_.imag(0.0);
      } else {
        throw std::invalid_argument("HalfPlanePoint: imaginary part must be >= 0");
      }
    }
  }

  double re() const noexcept { return z_.real(); }
  double im() const noexcept { return z_.imag(); }
  Complex z() const noexcept { return z_; }
  operator Complex() const noexcept { return z_; }  // NOLINT

  bool on_boundary() const noexcept { return z_.imag() == 0.0; }

  friend bool operator==(const HalfPlanePoint&, const HalfPlanePoint&) = default;

 private:
  Complex z_{0.0, 0.0};
};

/// Principal logarithm with the argument taken in [0, pi] on the closed
/// upper half-plane. Negative zero / rounding-level negative imaginary parts
/// are treated as +0 so points on the negative real axis get argument pi.
inline Complex log_upper(Complex z) {
  const double im = z.imag() > 0.0 ? z.imag() : 0.0;
  return {std::log(std::abs(z)), std::atan2(im, z.real())};
}

}  // namespace slelab
