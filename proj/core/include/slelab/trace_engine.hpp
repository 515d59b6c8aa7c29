#pragma once

// Approximate Loewner traces from chains of square-root slit maps.
//
// The trace at time t inside block k (offset s into the block) is
//   gamma(t) ~ f_0 o ... o f_{k-1} o f_k^{(s)} (lambda(t) + i y_tip)
// where f_k^{(s)} is block k stopped after time s. The evaluation point sits
// y_tip above the preimage of the current tip.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slelab/conformal_maps.hpp"
#include "slelab/driver_paths.hpp"
#include "slelab/half_plane.hpp"

namespace slelab {

struct TraceMeta {
  double kappa = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double y_tip = 0.0;
};

struct TraceCurve {
  std::vector<double> times;
  std::vector<HalfPlanePoint> points;
  TraceMeta meta;

  std::size_t size() const noexcept { return points.size(); }
};

/// Tip height 1e-3 / sqrt(n).
double default_y_tip(std::size_t n);

/// Knots t_k = k T / n and the midpoints between them: 2n + 1 times.
std::vector<double> knot_midpoint_times(std::size_t n, double horizon = 1.0);

/// Trace of the chain at time t in [0, chain.duration()].
HalfPlanePoint trace_point(const MapChain& chain, double t, double y_tip);

struct TraceOptions {
  double y_tip = 0.0;          // 0 selects default_y_tip(n)
  std::size_t max_retries = 3;  // each retry doubles y_tip
  std::size_t threads = 0;      // 0: hardware concurrency
};

/// gamma^n for a sqrt-interpolated driver, evaluated at `times` (default:
/// knots and midpoints of the driver's coarse mesh).
TraceCurve build_trace(const DriverPath& interpolated, const TraceOptions& options = {},
                       std::optional<std::vector<double>> times = std::nullopt);
TraceCurve build_trace(const MapChain& chain, const TraceMeta& meta, std::span<const double> times,
                       const TraceOptions& options = {});

/// High-resolution proxy for the true trace: the same pipeline run at n_ref
/// knots of the coupled driver sqrt(kappa) B. n_ref must divide b's resolution.
TraceCurve reference_trace(const BrownianSample& b, double kappa, std::size_t n_ref,
                           std::span<const double> times, const TraceOptions& options = {});

/// sup over common times of |a(t) - b(t)|. Throws MeshMismatch if the time
/// grids differ.
double sup_distance(const TraceCurve& a, const TraceCurve& b);

/// Least-squares direction (radians in [0, pi]) of the trace points seen from
/// the start point: the principal axis of the centred-at-origin point cloud.
double fit_trace_angle(const TraceCurve& trace, double origin);

/// The box {x + iy : |x| <= phi/sqrt(n), 1/(sqrt(n) phi) <= y <= c/sqrt(n)}.
struct TipBox {
  std::size_t n = 1;
  double c = 2.0 * 1.4142135623730951;
  double phi_n = 1.0;

  bool degenerate() const noexcept { return phi_n * c < 1.0; }
  bool contains(Complex z) const noexcept;
};

enum class BoxMode {
  exists,  // some s in [0, 2/n] lands in the box
  forall,  // every r in [1/n, 2/n] lands in the box
};

struct BoxReport {
  bool degenerate = false;
  bool satisfied = false;
  std::size_t samples = 0;
  std::size_t inside = 0;
  std::optional<double> witness;  // first s found inside the box
  std::optional<double> first_violation;
};

/// gamma_k(s) = g_{t_k}(gamma(t_k + s)) - lambda(t_k) for a chain whose block
/// boundaries include t_k = k T / n. Computed by composing only the blocks
/// after t_k, so no inverse map is needed.
std::vector<Complex> mapped_forward_curve(const MapChain& chain, double t_k,
                                          std::span<const double> offsets, double y_tip);

/// Report-only membership check of gamma_k against the box at scale n.
BoxReport tip_box_check(const MapChain& chain, std::size_t n, std::size_t k, const TipBox& box,
                        BoxMode mode, std::size_t samples = 256, double y_tip = 0.0);

/// max |gamma(t + s) - gamma(t)| over trace samples with 0 <= s <= y^2, for
/// each y. Used to fit the Hoelder-type modulus C y^(1 - beta).
struct ModulusPoint {
  double y = 0.0;
  double modulus = 0.0;
};
std::vector<ModulusPoint> modulus_scan(const TraceCurve& trace, std::span<const double> ys);

std::string trace_to_csv(const TraceCurve& trace);
std::string trace_to_svg(const TraceCurve& trace, const std::string& title);
nlohmann::ordered_json trace_manifest(const TraceCurve& trace);
nlohmann::ordered_json trace_to_json(const TraceCurve& trace);

}  // namespace slelab
