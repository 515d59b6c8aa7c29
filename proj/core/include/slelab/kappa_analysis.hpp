#pragma once

// Quantitative ingredients of the kappa-continuity argument: driver distances,
// the closeness bound for backward flows, the error terms Psi and Phi, the
// derivative exponent beta, rate fits, mesh selection and the coupled
// continuity experiment.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slelab/driver_paths.hpp"
#include "slelab/half_plane.hpp"
#include "slelab/loewner_ode.hpp"

namespace slelab {

/// sup_i |d1[i] - d2[i]|. Throws MeshMismatch unless both share resolution and horizon.
double driver_distance(const DriverPath& d1, const DriverPath& d2);

/// eps = sup |lambda^n_{kappa2} - sqrt(kappa1) B| and its two-term split.
struct EpsilonSplit {
  double epsilon = 0.0;
  double interpolation = 0.0;  // sup |lambda^n_{kappa2} - sqrt(kappa2) B|
  double kappa_gap = 0.0;      // |sqrt(kappa1) - sqrt(kappa2)| sup |B|
  double bound() const noexcept { return interpolation + kappa_gap; }
};
EpsilonSplit epsilon_split(const BrownianSample& b, double kappa1, double kappa2, std::size_t n);

/// arccosh(1 + |z - w|^2 / (2 Im z Im w)). Throws for points on the real axis.
double hyperbolic_distance(HalfPlanePoint z, HalfPlanePoint w);

/// I_{T,y} = sqrt(4T + y^2).
double i_ty(double horizon, double y);

/// |re_offset| I/y + eps exp[1/2 sqrt(log A1 log A2) + log log(I/y)],
/// A_k = I |deriv_k| / y. The inner logarithm of log log is clamped below at e,
/// and log A_k below at 0; both clamps can only enlarge the value.
double lemma23_bound(double eps, double horizon, double y, double re_offset, double deriv1,
                     double deriv2);

/// Measured left side and bound for two backward flows started at u1, u2
/// with Im u1 = Im u2.
struct Lemma23Sample {
  double measured = 0.0;
  double bound = 0.0;
  double eps = 0.0;
  double deriv1 = 0.0;
  double deriv2 = 0.0;
};
Lemma23Sample lemma23_check(const PiecewiseDriver& d1, const PiecewiseDriver& d2, HalfPlanePoint u1,
                            HalfPlanePoint u2, double horizon, const OdeOptions& options = {});

/// sup over t in [0, horizon] of |d1(t) - d2(t)|, sampled on `samples` equal steps.
double sampled_driver_gap(const PiecewiseDriver& d1, const PiecewiseDriver& d2, double horizon,
                          std::size_t samples);

struct ErrorTerms {
  double psi = 0.0;
  double phi = 0.0;
};

/// Psi(n) = |sqrt k1 - sqrt k2| c_hat 2 sqrt 2 sqrt n phi(n) and
/// Phi(n) = c |sqrt k1 - sqrt k2| exp[sqrt((1 + beta)/2) log(c phi(n) sqrt n)
///                                    + log log(2 sqrt(2n) phi(n))].
ErrorTerms psi_phi_terms(double kappa1, double kappa2, double n, double beta1, const Subpower& phi,
                         double c_hat = 1.0, double c = 1.0);

struct BetaEstimate {
  double beta = 0.0;
  double c0 = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double residual = 0.0;
  double r_squared = 0.0;
  std::vector<double> ys;
  std::vector<double> sup_derivative;  // per y

  nlohmann::ordered_json to_json() const;
};

/// Fits sup_{t, kappa} |f_t'(i y)| ~ c0 y^(-beta), where f_t(z) = g_t^{-1}(z + lambda(t))
/// is evaluated on the square-root chain of sqrt(kappa) B at resolution n.
/// Times are rounded to the nearest knot. Throws for fewer than two y values.
BetaEstimate estimate_beta(const BrownianSample& b, std::span<const double> kappas,
                           std::span<const double> times, std::span<const double> ys,
                           std::size_t n);

/// (1/2)(1 - sqrt((1 + beta)/2)): the decay exponent of |gamma^n - gamma|.
double theoretical_rate(double beta);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::size_t> excluded;  // indices with nonpositive distance
};

/// Log-log least squares of dists against ns. Needs at least four usable points.
RateFit rate_fit(std::span<const double> ns, std::span<const double> dists);

inline constexpr std::size_t kMinMesh = 32;
inline constexpr std::size_t kMaxMesh = std::size_t{1} << 14;

/// n = clamp(2^ceil(1.5 log2(1/gap_s)), 32, 2^14) for gap_s = |sqrt k - sqrt k_j|.
std::size_t choose_mesh_for_gap(double gap_s);
std::size_t choose_mesh(double kappa, double kappa_j);

struct ContinuityConfig {
  std::uint64_t seed = 42;
  double kappa = 2.0;
  std::vector<double> kappa_seq;
  double horizon = 1.0;
  /// Brownian resolution; also the reference resolution n_ref.
  std::size_t fine_resolution = std::size_t{1} << 16;
  /// Reference columns are compared on the knots and midpoints of this mesh.
  std::size_t eval_knots = 1024;
  double beta = 0.5;
  double c_hat = 1.0;
  double c = 1.0;
  Subpower phi{};
  std::size_t threads = 0;
};

struct ContinuityRow {
  std::size_t j = 0;
  double kappa_j = 0.0;
  std::size_t n_j = 0;
  double sup_dist = 0.0;
  double approx_sup_dist = 0.0;
  ErrorTerms terms;
  std::optional<std::string> error;
};

struct ContinuityReport {
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_ref = 0;
  std::size_t eval_knots = 0;
  std::vector<ContinuityRow> rows;

  std::string to_csv() const;        // j,kappa_j,n_j,sup_dist,approx_sup_dist
  std::string terms_to_csv() const;  // j,kappa_j,n_j,gap_s,psi,phi
  std::string to_svg() const;
  nlohmann::ordered_json meta() const;
};

/// Coupled traces gamma^{kappa_j} vs gamma^{kappa} from one Brownian sample.
/// The approx column compares the square-root traces at n_j = choose_mesh on
/// the knots and midpoints of n_j; the reference column compares high
/// resolution proxies (n_ref = fine_resolution) on the eval mesh. A failing
/// leg records its error and leaves NaN distances.
ContinuityReport continuity_experiment(const ContinuityConfig& config);

}  // namespace slelab
