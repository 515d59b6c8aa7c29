#include "slelab/rough_path.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "slelab/errors.hpp"
#include "slelab/io.hpp"

namespace slelab {

Signature2 chen(const Signature2& a, const Signature2& b) noexcept {
  Signature2 r;
  for (int i = 0; i < 2; ++i) {
    r.x1[i] = a.x1[i] + b.x1[i];
    for (int j = 0; j < 2; ++j) r.x2[i][j] = a.x2[i][j] + b.x2[i][j] + a.x1[i] * b.x1[j];
  }
  return r;
}

Signature2 operator-(const Signature2& a, const Signature2& b) noexcept {
  Signature2 r;
  for (int i = 0; i < 2; ++i) {
    r.x1[i] = a.x1[i] - b.x1[i];
    for (int j = 0; j < 2; ++j) r.x2[i][j] = a.x2[i][j] - b.x2[i][j];
  }
  return r;
}

Level2RoughPath::Level2RoughPath(double horizon, double kappa, double p, std::vector<double> w)
    : horizon_(horizon), kappa_(kappa), p_(p), w_(std::move(w)) {
  if (w_.size() < 2 || !std::has_single_bit(w_.size() - 1)) {
    throw std::invalid_argument("Level2RoughPath: mesh must have a power-of-two number of steps");
  }
  if (!(p_ > 2.0 && p_ <= 3.0)) throw std::invalid_argument("Level2RoughPath: p must lie in (2, 3]");
  const std::size_t m = resolution();
  s01_.assign(m + 1, 0.0);
  s10_.assign(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = time(k), dt = time(k + 1) - t;
    const double dw = w_[k + 1] - w_[k];
    s01_[k + 1] = s01_[k] + t * dw + 0.5 * dt * dw;
    s10_[k + 1] = s10_[k] + (w_[k] - w_[0]) * dt + 0.5 * dw * dt;
  }
}

Level2RoughPath Level2RoughPath::lift(const DriverPath& d, double p) {
  return Level2RoughPath(d.horizon(), d.meta().kappa, p, {d.values().begin(), d.values().end()});
}

Level2RoughPath Level2RoughPath::lift(const BrownianSample& b, double kappa, double p) {
  return lift(scale_driver(b, kappa), p);
}

std::vector<double> Level2RoughPath::grid() const {
  std::vector<double> g(resolution() + 1);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = time(i);
  return g;
}

Signature2 Level2RoughPath::increment(std::size_t i, std::size_t j) const {
  Signature2 r;
  const double ti = time(i);
  const double dt = time(j) - ti;
  const double dw = w_[j] - w_[i];
  r.x1 = {dt, dw};
  r.x2[0][0] = 0.5 * dt * dt;
  r.x2[1][1] = 0.5 * dw * dw;
  r.x2[0][1] = s01_[j] - s01_[i] - ti * dw;
  r.x2[1][0] = s10_[j] - s10_[i] - (w_[i] - w_[0]) * dt;
  return r;
}

Signature2 Level2RoughPath::direct_increment(std::size_t i, std::size_t j) const {
  Signature2 r;
  const double ti = time(i);
  for (std::size_t k = i; k < j; ++k) {
    const double a[2] = {time(k) - ti, w_[k] - w_[i]};
    const double d[2] = {time(k + 1) - time(k), w_[k + 1] - w_[k]};
    for (int u = 0; u < 2; ++u) {
      for (int v = 0; v < 2; ++v) r.x2[u][v] += a[u] * d[v] + 0.5 * d[u] * d[v];
    }
  }
  r.x1 = {time(j) - ti, w_[j] - w_[i]};
  return r;
}

namespace {

double geometric_defect(const Signature2& s) {
  double m = 0.0;
  for (int u = 0; u < 2; ++u) {
    for (int v = 0; v < 2; ++v) {
      const double sym = 0.5 * (s.x2[u][v] + s.x2[v][u]);
      m = std::max(m, std::abs(sym - 0.5 * s.x1[u] * s.x1[v]));
    }
  }
  return m;
}

double signature_gap(const Signature2& a, const Signature2& b) {
  const Signature2 d = a - b;
  return std::max(d.norm1(), d.norm2());
}

}  // namespace

std::vector<LiftCheckRow> lift_check(const Level2RoughPath& x) {
  const std::size_t m = x.resolution();
  std::vector<LiftCheckRow> rows;
  for (std::size_t level = 0; (std::size_t{1} << level) <= m; ++level) {
    const std::size_t len = std::size_t{1} << level;
    LiftCheckRow row;
    row.level = level;
    row.intervals = m / len;
    for (std::size_t s = 0; s < m; s += len) {
      const std::size_t u = s + len;
      const Signature2 whole = x.direct_increment(s, u);
      row.geometric_residual = std::max(row.geometric_residual, geometric_defect(whole));
      row.geometric_residual = std::max(row.geometric_residual, geometric_defect(x.increment(s, u)));
      if (len > 1) {
        const std::size_t t = s + len / 2;
        const double direct = signature_gap(whole, chen(x.direct_increment(s, t), x.direct_increment(t, u)));
        const double prefix = signature_gap(x.increment(s, u), chen(x.increment(s, t), x.increment(t, u)));
        row.chen_residual = std::max({row.chen_residual, direct, prefix});
      }
    }
    rows.push_back(row);
  }
  return rows;
}

double integration_by_parts_residual(const Level2RoughPath& x) {
  const std::size_t m = x.resolution();
  double t_dw = 0.0, w_dt = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dt = x.time(k + 1) - x.time(k);
    const double dw = x.w(k + 1) - x.w(k);
    t_dw += 0.5 * (x.time(k) + x.time(k + 1)) * dw;
    w_dt += 0.5 * (x.w(k) - x.w(0) + x.w(k + 1) - x.w(0)) * dt;
  }
  return std::abs(t_dw + w_dt - x.horizon() * (x.w(m) - x.w(0)));
}

std::string lift_check_to_csv(std::span<const LiftCheckRow> rows) {
  CsvTable t({"level", "intervals", "chen_residual", "geometric_residual"});
  for (const auto& r : rows) {
    t.add_row({static_cast<long long>(r.level), static_cast<long long>(r.intervals), r.chen_residual,
               r.geometric_residual});
  }
  return t.to_string();
}

double p_variation(std::span<const double> path, double p) {
  return p_variation_dp(path.size(), p, [&](std::size_t i, std::size_t j) {
    return std::abs(path[j] - path[i]);
  });
}

double p_variation(std::span<const Complex> path, double p) {
  return p_variation_dp(path.size(), p, [&](std::size_t i, std::size_t j) {
    return std::abs(path[j] - path[i]);
  });
}

namespace {

void check_same_mesh(const Level2RoughPath& x, const Level2RoughPath& y, std::size_t stride) {
  if (x.resolution() != y.resolution() || x.horizon() != y.horizon() || x.p() != y.p()) {
    throw MeshMismatch("rough paths differ in mesh or exponent p");
  }
  if (stride == 0 || x.resolution() % stride != 0) {
    throw MeshMismatch("stride must divide the mesh resolution");
  }
}

}  // namespace

double dp_distance(const Level2RoughPath& x, const Level2RoughPath& y, std::size_t stride) {
  check_same_mesh(x, y, stride);
  const std::size_t points = x.resolution() / stride + 1;
  const double p = x.p();
  // The DP raises d to the exponent, so level i uses d = |.|^(1/i) with
  // exponent p: sum |X^i - Y^i|^(p/i), and the result comes back as a 1/p power.
  const double level1 = p_variation_dp(points, p, [&](std::size_t i, std::size_t j) {
    return (x.increment(i * stride, j * stride) - y.increment(i * stride, j * stride)).norm1();
  });
  const double level2 = p_variation_dp(points, p, [&](std::size_t i, std::size_t j) {
    return std::sqrt((x.increment(i * stride, j * stride) - y.increment(i * stride, j * stride)).norm2());
  });
  // level2 is (sum |.|^(p/2))^(1/p); the metric wants the 2/p power.
  return std::max(level1, level2 * level2);
}

bool LiftContinuityTable::bound_holds() const noexcept {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const LiftContinuityRow& r) { return r.ratio1 <= c && r.ratio2 <= c; });
}

std::string LiftContinuityTable::to_csv() const {
  CsvTable t({"kappa_n", "a_n", "a_measured", "ratio1", "ratio2", "dp_distance", "C"});
  for (const auto& r : rows) t.add_row({r.kappa_n, r.a_n, r.a_measured, r.ratio1, r.ratio2, r.dp, c});
  return t.to_string();
}

LiftContinuityTable kappa_lift_continuity(const BrownianSample& b, double kappa,
                                          std::span<const double> kappa_seq, double p,
                                          std::size_t stride) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa_lift_continuity: kappa must be > 0");
  const Level2RoughPath target = Level2RoughPath::lift(b, kappa, p);
  check_same_mesh(target, target, stride);
  const std::size_t points = target.resolution() / stride + 1;
  const double root = std::sqrt(kappa);
  auto omega = [&](std::size_t i, std::size_t j) { return root * (target.time(j) - target.time(i)); };

  LiftContinuityTable table;
  table.kappa = kappa;
  table.p = p;
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = i + 1; j < points; ++j) {
      const Signature2 s = target.increment(i * stride, j * stride);
      const double w = omega(i * stride, j * stride);
      table.c0 = std::max({table.c0, s.norm1() / std::pow(w, 1.0 / p), s.norm2() / std::pow(w, 2.0 / p)});
    }
  }

  double max_a = 0.0;
  const std::size_t m = target.resolution();
  for (double kn : kappa_seq) {
    if (!(kn > 0.0)) throw std::invalid_argument("kappa_lift_continuity: kappa_n must be > 0");
    const Level2RoughPath lifted = Level2RoughPath::lift(b, kn, p);
    LiftContinuityRow row;
    row.kappa_n = kn;
    row.a_n = (root - std::sqrt(kn)) / root;
    row.a_measured = -((lifted.w(m) - lifted.w(0)) - (target.w(m) - target.w(0))) /
                     (target.w(m) - target.w(0));
    max_a = std::max(max_a, std::abs(row.a_n));
    if (row.a_n != 0.0) {
      const double a = std::abs(row.a_n);
      for (std::size_t i = 0; i < points; ++i) {
        for (std::size_t j = i + 1; j < points; ++j) {
          const Signature2 d = lifted.increment(i * stride, j * stride) - target.increment(i * stride, j * stride);
          const double w = omega(i * stride, j * stride);
          row.ratio1 = std::max(row.ratio1, d.norm1() / (a * std::pow(w, 1.0 / p)));
          row.ratio2 = std::max(row.ratio2, d.norm2() / (a * std::pow(w, 2.0 / p)));
        }
      }
    }
    row.dp = dp_distance(lifted, target, stride);
    table.rows.push_back(row);
  }
  table.c = (2.0 + max_a) * table.c0;
  return table;
}

LipGammaBound lip_gamma_bound(double delta, std::size_t k) {
  if (!(delta > 0.0)) throw std::invalid_argument("lip_gamma_bound: delta must be > 0");
  double best = 0.0, factorial = 1.0;
  for (std::size_t j = 0; j <= k; ++j) {
    if (j > 0) factorial *= static_cast<double>(j);
    best = std::max(best, factorial / std::pow(delta, static_cast<double>(j + 1)));
  }
  return {delta, k, 2.0 * best};
}

bool RdeTrajectory::im_nondecreasing() const noexcept {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i].imag() < values[i - 1].imag()) return false;
  }
  return true;
}

std::string RdeTrajectory::to_csv() const {
  CsvTable t({"t", "re", "im"});
  for (std::size_t i = 0; i < values.size(); ++i) t.add_row({times[i], values[i].real(), values[i].imag()});
  return t.to_string();
}

namespace {

class DavieStepper {
 public:
  explicit DavieStepper(const Level2RoughPath& x) : x_(x) {}

  Complex advance(Complex z, std::size_t i, std::size_t j) {
    const Signature2 s = x_.increment(i, j);
    const double dt = s.x1[0];
    const Complex inv = 1.0 / z;
    const Complex inv2 = inv * inv;
    const Complex next = z - 2.0 * dt * inv - s.x1[1] - 2.0 * dt * dt * inv2 * inv - 2.0 * s.x2[1][0] * inv2;
    if (next.imag() >= z.imag() && std::isfinite(next.real()) && std::isfinite(next.imag())) return next;
    if (j - i == 1) {
      throw NumericalFailure("RDE step lowers Im Z even on the finest mesh (t = " +
                             std::to_string(x_.time(i)) + ")");
    }
    ++halvings;
    const std::size_t mid = i + (j - i) / 2;
    return advance(advance(z, i, mid), mid, j);
  }

  std::size_t halvings = 0;

 private:
  const Level2RoughPath& x_;
};

}  // namespace

RdeTrajectory solve_rde_backward(const Level2RoughPath& x, HalfPlanePoint z0, const RdeOptions& options) {
  if (!(options.delta > 0.0)) throw std::invalid_argument("solve_rde_backward: delta must be > 0");
  if (std::abs(z0.z()) < options.delta) {
    throw std::invalid_argument("solve_rde_backward: |z0| is below delta");
  }
  if (options.stride == 0 || x.resolution() % options.stride != 0) {
    throw MeshMismatch("solve_rde_backward: stride must divide the mesh resolution");
  }
  RdeTrajectory traj;
  DavieStepper stepper(x);
  Complex z = z0;
  traj.times.push_back(0.0);
  traj.values.push_back(z);
  for (std::size_t i = 0; i < x.resolution(); i += options.stride) {
    z = stepper.advance(z, i, i + options.stride);
    traj.times.push_back(x.time(i + options.stride));
    traj.values.push_back(z);
  }
  traj.halvings = stepper.halvings;
  return traj;
}

RdeTrajectory euler_maruyama_backward(const BrownianSample& b, double kappa, HalfPlanePoint z0,
                                      std::size_t output_stride) {
  const std::size_t m = b.resolution();
  if (output_stride == 0 || m % output_stride != 0) {
    throw MeshMismatch("euler_maruyama_backward: output stride must divide the resolution");
  }
  const double h = b.horizon() / static_cast<double>(m);
  const double root = std::sqrt(kappa);
  const auto inc = b.increments();
  RdeTrajectory traj;
  Complex z = z0;
  traj.times.push_back(0.0);
  traj.values.push_back(z);
  for (std::size_t k = 0; k < m; ++k) {
    z += -2.0 / z * h - root * inc[k];
    if ((k + 1) % output_stride == 0) {
      traj.times.push_back(b.horizon() * static_cast<double>(k + 1) / static_cast<double>(m));
      traj.values.push_back(z);
    }
  }
  return traj;
}

double trajectory_sup_distance(const RdeTrajectory& a, const RdeTrajectory& b) {
  if (a.times.size() != b.times.size()) throw MeshMismatch("trajectories have different time grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * (1.0 + std::abs(a.times[i]))) {
      throw MeshMismatch("trajectories have different time grids");
    }
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  }
  return d;
}

double trajectory_pvar_distance(const RdeTrajectory& a, const RdeTrajectory& b, double p) {
  trajectory_sup_distance(a, b);  // grid check
  std::vector<Complex> diff(a.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.values[i] - b.values[i];
  return p_variation(diff, p);
}

std::string rde_continuity_to_csv(std::span<const RdeContinuityRow> rows, const std::string& parameter) {
  CsvTable t({parameter, "sup_dist", "pvar_dist"});
  for (const auto& r : rows) t.add_row({r.parameter, r.sup_dist, r.pvar_dist});
  return t.to_string();
}

std::vector<RdeContinuityRow> rde_kappa_continuity(const BrownianSample& b, double kappa,
                                                   std::span<const double> kappa_seq,
                                                   HalfPlanePoint z0, double p,
                                                   const RdeOptions& options) {
  const RdeTrajectory target = solve_rde_backward(Level2RoughPath::lift(b, kappa, p), z0, options);
  std::vector<RdeContinuityRow> rows;
  for (double kn : kappa_seq) {
    const RdeTrajectory other = solve_rde_backward(Level2RoughPath::lift(b, kn, p), z0, options);
    rows.push_back({kn, trajectory_sup_distance(other, target), trajectory_pvar_distance(other, target, p)});
  }
  return rows;
}

std::vector<RdeContinuityRow> rde_start_continuity(const BrownianSample& b, double kappa,
                                                   HalfPlanePoint z0,
                                                   std::span<const Complex> perturbations,
                                                   double p, const RdeOptions& options) {
  const Level2RoughPath x = Level2RoughPath::lift(b, kappa, p);
  const RdeTrajectory target = solve_rde_backward(x, z0, options);
  std::vector<RdeContinuityRow> rows;
  for (Complex dz : perturbations) {
    const RdeTrajectory other = solve_rde_backward(x, z0.z() + dz, options);
    rows.push_back({std::abs(dz), trajectory_sup_distance(other, target),
                    trajectory_pvar_distance(other, target, p)});
  }
  return rows;
}

}  // namespace slelab
