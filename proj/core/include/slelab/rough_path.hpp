#pragma once

// Level-2 rough paths over X_t = (t, W_t) with W = sqrt(kappa) B, discrete
// p-variation, the d_p metric, and a level-2 solver for the shifted backward
// Loewner equation
//
//   dZ = -2/Z dt - dW,   Z_t = h_t - W_t.
//
// Coordinates: index 0 is time, index 1 is W. Level-2 entries are
// X2[a][b] = int_{s<u<v<t} dX^a_u dX^b_v. Norms are l1 on R^2 and R^2 (x) R^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "slelab/driver_paths.hpp"
#include "slelab/half_plane.hpp"

namespace slelab {

struct Signature2 {
  std::array<double, 2> x1{};
  std::array<std::array<double, 2>, 2> x2{};

  double norm1() const noexcept { return std::abs(x1[0]) + std::abs(x1[1]); }
  double norm2() const noexcept {
    return std::abs(x2[0][0]) + std::abs(x2[0][1]) + std::abs(x2[1][0]) + std::abs(x2[1][1]);
  }
};

/// Truncated tensor product: the signature of a concatenation.
Signature2 chen(const Signature2& a, const Signature2& b) noexcept;
Signature2 operator-(const Signature2& a, const Signature2& b) noexcept;

/// omega(s, t) = K (t - s).
struct LinearControl {
  double k = 1.0;
  double operator()(double s, double t) const noexcept { return k * (t - s); }
};

/// Geometric level-2 lift of (t, W_t), linear between mesh points.
///
/// Prefix signatures from time 0 are stored, so any increment costs O(1).
class Level2RoughPath {
 public:
  /// Lift of (t, d(t)); d's kappa is recorded. The mesh must be dyadic.
  static Level2RoughPath lift(const DriverPath& d, double p = 2.5);
  /// Lift of (t, sqrt(kappa) B).
  static Level2RoughPath lift(const BrownianSample& b, double kappa, double p = 2.5);

  std::size_t resolution() const noexcept { return w_.size() - 1; }
  double horizon() const noexcept { return horizon_; }
  double kappa() const noexcept { return kappa_; }
  double p() const noexcept { return p_; }
  double time(std::size_t i) const noexcept {
    return horizon_ * static_cast<double>(i) / static_cast<double>(resolution());
  }
  std::vector<double> grid() const;
  double w(std::size_t i) const { return w_[i]; }

  /// X_{t_i, t_j} from the prefix signatures.
  Signature2 increment(std::size_t i, std::size_t j) const;
  /// X_{t_i, t_j} summed segment by segment; an independent check on increment.
  Signature2 direct_increment(std::size_t i, std::size_t j) const;

 private:
  Level2RoughPath(double horizon, double kappa, double p, std::vector<double> w);

  double horizon_;
  double kappa_;
  double p_;
  std::vector<double> w_;
  std::vector<double> s01_;  // int_0^t u dW_u
  std::vector<double> s10_;  // int_0^t (W_u - W_0) du
};

/// Per dyadic scale: the largest Chen and geometric-identity residuals.
struct LiftCheckRow {
  std::size_t level = 0;      // intervals of 2^level fine steps
  std::size_t intervals = 0;  // number of dyadic intervals at this level
  double chen_residual = 0.0;
  double geometric_residual = 0.0;
};
std::vector<LiftCheckRow> lift_check(const Level2RoughPath& x);
/// |int t dW + int W dt - T W_T| over [0, T], from separate trapezoid sums.
double integration_by_parts_residual(const Level2RoughPath& x);
std::string lift_check_to_csv(std::span<const LiftCheckRow> rows);

/// Exact discrete p-variation over sub-partitions of the mesh: with
/// best[j] = max_{i<j} best[i] + d(i, j)^p the result is best[m]^(1/p).
template <class Dist>
double p_variation_dp(std::size_t points, double p, Dist&& dist) {
  if (!(p >= 1.0)) throw std::invalid_argument("p_variation: p must be >= 1");
  if (points < 2) throw std::invalid_argument("p_variation: need at least two points");
  std::vector<double> best(points, 0.0);
  for (std::size_t j = 1; j < points; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) b = std::max(b, best[i] + std::pow(dist(i, j), p));
    best[j] = b;
  }
  return std::pow(best.back(), 1.0 / p);
}

double p_variation(std::span<const double> path, double p);
double p_variation(std::span<const Complex> path, double p);

/// max over levels i of (sup over mesh partitions of sum |X^i - Y^i|^(p/i))^(i/p),
/// evaluated on every `stride`-th mesh point. Throws MeshMismatch for
/// different meshes or exponents.
double dp_distance(const Level2RoughPath& x, const Level2RoughPath& y, std::size_t stride = 1);

struct LiftContinuityRow {
  double kappa_n = 0.0;
  double a_n = 0.0;           // (sqrt kappa - sqrt kappa_n) / sqrt kappa
  double a_measured = 0.0;    // -(W_n - W)(0, T) / W(0, T)
  double ratio1 = 0.0;        // max |X_n^1 - X^1| / (|a_n| omega^(1/p))
  double ratio2 = 0.0;        // max |X_n^2 - X^2| / (|a_n| omega^(2/p))
  double dp = 0.0;
};

struct LiftContinuityTable {
  double kappa = 0.0;
  double p = 0.0;
  /// max over levels and intervals of |X^i| / omega^(i/p) for the target lift.
  double c0 = 0.0;
  /// (2 + max |a_n|) c0; every ratio must stay below it.
  double c = 0.0;
  std::vector<LiftContinuityRow> rows;

  bool bound_holds() const noexcept;
  std::string to_csv() const;
};

/// Per-interval convergence of lifts (t, sqrt(kappa_n) B) -> (t, sqrt(kappa) B)
/// with the control omega(s, t) = sqrt(kappa)(t - s), evaluated on every
/// `stride`-th point of b's mesh.
LiftContinuityTable kappa_lift_continuity(const BrownianSample& b, double kappa,
                                          std::span<const double> kappa_seq, double p = 2.5,
                                          std::size_t stride = 1);

struct LipGammaBound {
  double delta = 0.0;
  std::size_t k = 0;
  double m = 0.0;
};
/// M = 2 max_{0<=j<=k} j! / delta^(j+1): derivatives of -2/z on |z| > delta.
LipGammaBound lip_gamma_bound(double delta, std::size_t k);

struct RdeOptions {
  /// |z0| must be at least this.
  double delta = 1e-3;
  /// Coarse step in units of the lift's mesh; halved locally when Im Z would drop.
  std::size_t stride = 1;
};

struct RdeTrajectory {
  std::vector<double> times;
  std::vector<Complex> values;
  std::size_t halvings = 0;

  bool im_nondecreasing() const noexcept;
  std::string to_csv() const;  // t,re,im
};

/// Level-2 (Davie) scheme
///   Z <- Z - 2 dt/Z - dW - 2 dt^2/Z^3 - 2 X2[W][t] / Z^2.
/// A step that would lower Im Z is redone as two half steps on the finer
/// mesh; at the finest mesh that throws NumericalFailure.
RdeTrajectory solve_rde_backward(const Level2RoughPath& x, HalfPlanePoint z0,
                                 const RdeOptions& options = {});

/// Euler-Maruyama for dZ = -2/Z dt - sqrt(kappa) dB on b's mesh, recorded
/// every output_stride steps.
RdeTrajectory euler_maruyama_backward(const BrownianSample& b, double kappa, HalfPlanePoint z0,
                                      std::size_t output_stride = 1);

/// sup_t |a(t) - b(t)|; throws MeshMismatch for different time grids.
double trajectory_sup_distance(const RdeTrajectory& a, const RdeTrajectory& b);
/// p-variation of the difference path a - b.
double trajectory_pvar_distance(const RdeTrajectory& a, const RdeTrajectory& b, double p);

struct RdeContinuityRow {
  double parameter = 0.0;  // kappa_n, or |z0 perturbation|
  double sup_dist = 0.0;
  double pvar_dist = 0.0;
};
std::string rde_continuity_to_csv(std::span<const RdeContinuityRow> rows, const std::string& parameter);

/// Solutions for kappa_n against the kappa solution, all driven by b.
std::vector<RdeContinuityRow> rde_kappa_continuity(const BrownianSample& b, double kappa,
                                                   std::span<const double> kappa_seq,
                                                   HalfPlanePoint z0, double p = 2.5,
                                                   const RdeOptions& options = {});
/// Solutions from z0 + dz against the z0 solution at fixed kappa.
std::vector<RdeContinuityRow> rde_start_continuity(const BrownianSample& b, double kappa,
                                                   HalfPlanePoint z0,
                                                   std::span<const Complex> perturbations,
                                                   double p = 2.5, const RdeOptions& options = {});

}  // namespace slelab
