#pragma once

// Numerical integration of the chordal Loewner equations
//
//   forward:   d/dt g_t(z) =  2 / (g_t(z) - lambda(t)),   g_0(z) = z
//   backward:  d/dt h_t(z) = -2 / (h_t(z) - lambda(t)),   h_0(z) = z
//
// with an embedded Dormand-Prince 5(4) pair. On every driver piece the time
// variable is replaced by u = sqrt(t - t0), which turns square-root drivers
// into polynomials in u and keeps the right-hand side smooth at the knots.

#include <cstddef>
#include <vector>

#include "slelab/driver_paths.hpp"
#include "slelab/half_plane.hpp"

namespace slelab {

struct OdeOptions {
  double atol = 1e-9;
  double rtol = 1e-9;
  /// |g - lambda| below this is treated as the point being swallowed.
  double swallow_radius = 1e-7;
  std::size_t max_steps = 10'000'000;
};

/// Value and spatial derivative of a flow map at a point.
struct FlowValue {
  HalfPlanePoint value;
  Complex derivative{1.0, 0.0};
};

struct FlowSample {
  double t = 0.0;
  Complex h;
};

/// g_t(z). Throws SwallowedPoint if z leaves the domain before time t.
HalfPlanePoint forward_ode(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                           const OdeOptions& options = {});
HalfPlanePoint forward_ode(const DriverPath& driver, HalfPlanePoint z, double t,
                           const OdeOptions& options = {});

/// g_t^{-1}(w), obtained by running the forward equation from time t back to 0.
HalfPlanePoint inverse_ode(const PiecewiseDriver& driver, HalfPlanePoint w, double t,
                           const OdeOptions& options = {});
HalfPlanePoint inverse_ode(const DriverPath& driver, HalfPlanePoint w, double t,
                           const OdeOptions& options = {});

/// h_t(z). Starting exactly at the singularity z = lambda(0) is rejected.
HalfPlanePoint backward_ode(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                            const OdeOptions& options = {});
HalfPlanePoint backward_ode(const DriverPath& driver, HalfPlanePoint z, double t,
                            const OdeOptions& options = {});

/// h_t(z) together with h_t'(z) from the variational equation.
FlowValue backward_flow(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                        const OdeOptions& options = {});

/// h along the accepted integration steps (including both end points).
std::vector<FlowSample> backward_trajectory(const PiecewiseDriver& driver, HalfPlanePoint z,
                                            double t, const OdeOptions& options = {});

}  // namespace slelab
