#include "slelab/loewner_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "slelab/errors.hpp"

namespace slelab {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// State: the flow value and (optionally) its spatial derivative.
struct State {
  Complex g;
  Complex dg;
};

State operator+(const State& a, const State& b) { return {a.g + b.g, a.dg + b.dg}; }
State operator*(double s, const State& a) { return {s * a.g, s * a.dg}; }

// Right-hand side in the substituted variable u = sqrt(t - t0) on one piece:
//   dg/du = sign * 4u / (g - lambda(t0 + u^2))
//   d(g')/du = -sign * 4u g' / (g - lambda)^2
struct PieceField {
  const DriverPiece& piece;
  double sign;
  double swallow_radius;
  bool with_derivative;

  // Returns false when the state sits inside the swallow radius.
  bool operator()(double u, const State& y, State& out) const {
    const double lambda = piece.shift + piece.sqrt_coef * u + piece.slope * u * u;
    const Complex d = y.g - lambda;
    if (std::abs(d) < swallow_radius) return false;
    const Complex inv = 1.0 / d;
    out.g = sign * 4.0 * u * inv;
    out.dg = with_derivative ? -sign * 4.0 * u * y.dg * inv * inv : Complex{};
    return true;
  }
};

double error_scale(Complex a, Complex b, const OdeOptions& o) {
  return o.atol + o.rtol * std::max(std::abs(a), std::abs(b));
}

class Integrator {
 public:
  Integrator(const PiecewiseDriver& driver, double sign, bool with_derivative,
             const OdeOptions& options, std::vector<FlowSample>* trace)
      : driver_(driver), sign_(sign), deriv_(with_derivative), opt_(options), trace_(trace) {}

  State run(State y, double t_from, double t_to) {
    if (trace_) trace_->push_back({t_from, y.g});
    if (t_from == t_to) return y;
    const auto pieces = driver_.pieces();
    if (t_from < t_to) {
      for (std::size_t i = driver_.piece_index(t_from); i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        const double a = std::max(p.t0, t_from), b = std::min(p.t1, t_to);
        if (b > a) y = run_piece(p, y, a, b);
        if (p.t1 >= t_to) break;
      }
    } else {
      for (std::size_t i = driver_.piece_index(t_from) + 1; i-- > 0;) {
        const auto& p = pieces[i];
        const double a = std::max(p.t0, t_to), b = std::min(p.t1, t_from);
        if (b > a) y = run_piece(p, y, b, a);
        if (p.t0 <= t_to) break;
      }
    }
    return y;
  }

 private:
  State run_piece(const DriverPiece& piece, State y, double t_start, double t_end) {
    const PieceField field{piece, sign_, opt_.swallow_radius, deriv_};
    double u = std::sqrt(std::max(t_start - piece.t0, 0.0));
    const double u_end = std::sqrt(std::max(t_end - piece.t0, 0.0));
    const double span = u_end - u;
    const double dir = span >= 0 ? 1.0 : -1.0;
    double h = h_prev_ > 0 ? std::min(h_prev_, std::abs(span)) : std::abs(span);

    auto time_of = [&](double uu) { return piece.t0 + uu * uu; };
    State k1;
    if (!field(u, y, k1)) throw SwallowedPoint("Loewner flow reached the driver", time_of(u));

    while (dir * (u_end - u) > 0.0) {
      if (++steps_ > opt_.max_steps) throw NumericalFailure("Loewner ODE: step budget exhausted");
      bool last = false;
      if (h >= std::abs(u_end - u)) {
        h = std::abs(u_end - u);
        last = true;
      }
      const double hs = dir * h;
      State k2, k3, k4, k5, k6, k7;
      bool ok = field(u + c2 * hs, y + (hs * a21) * k1, k2);
      ok = ok && field(u + c3 * hs, y + hs * (a31 * k1 + a32 * k2), k3);
      ok = ok && field(u + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3), k4);
      ok = ok && field(u + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
      ok = ok && field(u + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
      State y_new{};
      double err = 2.0;
      if (ok) {
        y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        ok = field(u + hs, y_new, k7);
        if (ok) {
          const State e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
          err = std::abs(e.g) / error_scale(y.g, y_new.g, opt_);
          if (deriv_) err = std::max(err, std::abs(e.dg) / error_scale(y.dg, y_new.dg, opt_));
        }
      }
      if (!std::isfinite(err)) err = 2.0;
      if (err <= 1.0) {
        u = last ? u_end : u + hs;
        y = y_new;
        k1 = k7;
        if (trace_) trace_->push_back({time_of(u), y.g});
        const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (!last) h_prev_ = h;
      } else {
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
        if (h < 1e-15 * std::max(1.0, std::abs(u))) {
          throw SwallowedPoint("Loewner ODE: step size underflow near the driver", time_of(u));
        }
      }
    }
    return y;
  }

  const PiecewiseDriver& driver_;
  double sign_;
  bool deriv_;
  const OdeOptions& opt_;
  std::vector<FlowSample>* trace_;
  double h_prev_ = 0.0;
  std::size_t steps_ = 0;
};

void check_horizon(const PiecewiseDriver& driver, double t, const char* who) {
  if (!(t >= 0.0) || t > driver.horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument(std::string(who) + ": time outside the driver's horizon");
  }
}

void check_not_singular(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                        const OdeOptions& o, const char* who) {
  if (std::abs(z.z() - driver(t)) < o.swallow_radius) {
    throw std::invalid_argument(std::string(who) + ": start point sits on the driver");
  }
}

}  // namespace

HalfPlanePoint forward_ode(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                           const OdeOptions& options) {
  check_horizon(driver, t, "forward_ode");
  check_not_singular(driver, z, 0.0, options, "forward_ode");
  Integrator integ(driver, +1.0, false, options, nullptr);
  return integ.run({z.z(), {1.0, 0.0}}, 0.0, t).g;
}

HalfPlanePoint forward_ode(const DriverPath& driver, HalfPlanePoint z, double t,
                           const OdeOptions& options) {
  return forward_ode(PiecewiseDriver::from_path(driver), z, t, options);
}

HalfPlanePoint inverse_ode(const PiecewiseDriver& driver, HalfPlanePoint w, double t,
                           const OdeOptions& options) {
  check_horizon(driver, t, "inverse_ode");
  check_not_singular(driver, w, t, options, "inverse_ode");
  Integrator integ(driver, +1.0, false, options, nullptr);
  return integ.run({w.z(), {1.0, 0.0}}, t, 0.0).g;
}

HalfPlanePoint inverse_ode(const DriverPath& driver, HalfPlanePoint w, double t,
                           const OdeOptions& options) {
  return inverse_ode(PiecewiseDriver::from_path(driver), w, t, options);
}

HalfPlanePoint backward_ode(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                            const OdeOptions& options) {
  return backward_flow(driver, z, t, options).value;
}

HalfPlanePoint backward_ode(const DriverPath& driver, HalfPlanePoint z, double t,
                            const OdeOptions& options) {
  return backward_ode(PiecewiseDriver::from_path(driver), z, t, options);
}

FlowValue backward_flow(const PiecewiseDriver& driver, HalfPlanePoint z, double t,
                        const OdeOptions& options) {
  check_horizon(driver, t, "backward_ode");
  check_not_singular(driver, z, 0.0, options, "backward_ode");
  Integrator integ(driver, -1.0, true, options, nullptr);
  const State s = integ.run({z.z(), {1.0, 0.0}}, 0.0, t);
  return {s.g, s.dg};
}

std::vector<FlowSample> backward_trajectory(const PiecewiseDriver& driver, HalfPlanePoint z,
                                            double t, const OdeOptions& options) {
  check_horizon(driver, t, "backward_trajectory");
  check_not_singular(driver, z, 0.0, options, "backward_trajectory");
  std::vector<FlowSample> out;
  Integrator integ(driver, -1.0, false, options, &out);
  integ.run({z.z(), {1.0, 0.0}}, 0.0, t);
  return out;
}

}  // namespace slelab
