#include "slelab/kappa_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "slelab/conformal_maps.hpp"
#include "slelab/errors.hpp"
#include "slelab/fit.hpp"
#include "slelab/io.hpp"
#include "slelab/trace_engine.hpp"

namespace slelab {

double driver_distance(const DriverPath& d1, const DriverPath& d2) {
  if (d1.resolution() != d2.resolution() ||
      std::abs(d1.horizon() - d2.horizon()) > 1e-12 * d1.horizon()) {
    throw MeshMismatch("driver_distance: drivers live on different meshes");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < d1.values().size(); ++i) m = std::max(m, std::abs(d1[i] - d2[i]));
  return m;
}

EpsilonSplit epsilon_split(const BrownianSample& b, double kappa1, double kappa2, std::size_t n) {
  const DriverPath target = scale_driver(b, kappa1);
  const DriverPath same = scale_driver(b, kappa2);
  const DriverPath interp = sqrt_interpolate(same, n);
  double sup_b = 0.0;
  for (double v : b.values()) sup_b = std::max(sup_b, std::abs(v));
  EpsilonSplit s;
  s.epsilon = driver_distance(interp, target);
  s.interpolation = driver_distance(interp, same);
  s.kappa_gap = std::abs(std::sqrt(kappa1) - std::sqrt(kappa2)) * sup_b;
  return s;
}

double hyperbolic_distance(HalfPlanePoint z, HalfPlanePoint w) {
  if (!(z.im() > 0.0) || !(w.im() > 0.0)) {
    throw std::invalid_argument("hyperbolic_distance: points must lie strictly inside H");
  }
  // arccosh(1 + 2x^2) = 2 asinh(x), which stays accurate for nearby points.
  const double x = std::abs(z.z() - w.z()) / (2.0 * std::sqrt(z.im() * w.im()));
  return 2.0 * std::asinh(x);
}

double i_ty(double horizon, double y) { return std::sqrt(4.0 * horizon + y * y); }

double lemma23_bound(double eps, double horizon, double y, double re_offset, double deriv1,
                     double deriv2) {
  if (!(y > 0.0)) throw std::invalid_argument("lemma23_bound: y must be > 0");
  if (!(horizon >= 0.0) || !(eps >= 0.0)) {
    throw std::invalid_argument("lemma23_bound: need T >= 0 and eps >= 0");
  }
  const double ratio = i_ty(horizon, y) / y;
  const double log_a1 = std::max(0.0, std::log(ratio * std::abs(deriv1)));
  const double log_a2 = std::max(0.0, std::log(ratio * std::abs(deriv2)));
  const double loglog = std::log(std::log(std::max(ratio, std::numbers::e)));
  return std::abs(re_offset) * ratio + eps * std::exp(0.5 * std::sqrt(log_a1 * log_a2) + loglog);
}

double sampled_driver_gap(const PiecewiseDriver& d1, const PiecewiseDriver& d2, double horizon,
                          std::size_t samples) {
  double m = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = horizon * static_cast<double>(i) / static_cast<double>(samples);
    m = std::max(m, std::abs(d1(t) - d2(t)));
  }
  return m;
}

Lemma23Sample lemma23_check(const PiecewiseDriver& d1, const PiecewiseDriver& d2, HalfPlanePoint u1,
                            HalfPlanePoint u2, double horizon, const OdeOptions& options) {
  if (std::abs(u1.im() - u2.im()) > 1e-14 * (1.0 + u1.im())) {
    throw std::invalid_argument("lemma23_check: starting points need equal imaginary parts");
  }
  const FlowValue h1 = backward_flow(d1, u1, horizon, options);
  const FlowValue h2 = backward_flow(d2, u2, horizon, options);
  // Fine sampling of the continuous drivers; pieces are at least this fine.
  const std::size_t samples = 8 * std::max(d1.pieces().size(), d2.pieces().size());
  Lemma23Sample s;
  s.measured = std::abs(h1.value.z() - h2.value.z());
  s.eps = sampled_driver_gap(d1, d2, horizon, samples);
  s.deriv1 = std::abs(h1.derivative);
  s.deriv2 = std::abs(h2.derivative);
  s.bound = lemma23_bound(s.eps, horizon, u1.im(), u1.re() - u2.re(), s.deriv1, s.deriv2);
  return s;
}

ErrorTerms psi_phi_terms(double kappa1, double kappa2, double n, double beta1, const Subpower& phi,
                         double c_hat, double c) {
  const double gap = std::abs(std::sqrt(kappa1) - std::sqrt(kappa2));
  const double phi_n = phi(n);
  const double root_n = std::sqrt(n);
  ErrorTerms e;
  e.psi = gap * c_hat * 2.0 * std::numbers::sqrt2 * root_n * phi_n;
  e.phi = c * gap *
          std::exp(std::sqrt((1.0 + beta1) / 2.0) * std::log(c * phi_n * root_n) +
                   std::log(std::log(2.0 * std::sqrt(2.0 * n) * phi_n)));
  return e;
}

nlohmann::ordered_json BetaEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["beta"] = beta;
  j["c0"] = c0;
  j["y_min"] = y_min;
  j["y_max"] = y_max;
  j["residual"] = residual;
  j["r_squared"] = r_squared;
  j["y"] = ys;
  j["sup_derivative"] = sup_derivative;
  return j;
}

BetaEstimate estimate_beta(const BrownianSample& b, std::span<const double> kappas,
                           std::span<const double> times, std::span<const double> ys,
                           std::size_t n) {
  if (ys.size() < 2) throw std::invalid_argument("estimate_beta: need at least two y values");
  for (double y : ys) {
    if (!(y > 0.0 && y <= 1.0)) throw std::invalid_argument("estimate_beta: y must lie in (0, 1]");
  }
  if (kappas.empty() || times.empty()) throw std::invalid_argument("estimate_beta: empty grid");
  BetaEstimate est;
  est.ys.assign(ys.begin(), ys.end());
  est.sup_derivative.assign(ys.size(), 0.0);
  const double horizon = b.horizon();
  for (double kappa : kappas) {
    const MapChain chain = MapChain::from_driver(sqrt_interpolate(scale_driver(b, kappa), n));
    const auto blocks = chain.blocks();
    for (double t : times) {
      const auto k = static_cast<std::size_t>(
          std::clamp(std::lround(t / horizon * static_cast<double>(n)), 0L, static_cast<long>(n)));
      const double lambda = k < n ? blocks[k].shift() : blocks[n - 1].tip_preimage();
      for (std::size_t i = 0; i < ys.size(); ++i) {
        const double d = std::abs(map_derivative(chain.prefix(k), Complex(lambda, ys[i])));
        est.sup_derivative[i] = std::max(est.sup_derivative[i], d);
      }
    }
  }
  std::vector<double> lx(ys.size()), ly(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    lx[i] = std::log(1.0 / ys[i]);
    ly[i] = std::log(est.sup_derivative[i]);
  }
  const LineFit f = fit_line(lx, ly);
  est.beta = f.slope;
  est.c0 = std::exp(f.intercept);
  est.residual = f.residual;
  est.r_squared = f.r_squared;
  est.y_min = *std::min_element(ys.begin(), ys.end());
  est.y_max = *std::max_element(ys.begin(), ys.end());
  return est;
}

double theoretical_rate(double beta) { return 0.5 * (1.0 - std::sqrt((1.0 + beta) / 2.0)); }

RateFit rate_fit(std::span<const double> ns, std::span<const double> dists) {
  if (ns.size() != dists.size()) throw std::invalid_argument("rate_fit: length mismatch");
  RateFit r;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(dists[i] > 0.0) || !(ns[i] > 0.0)) {
      r.excluded.push_back(i);
      continue;
    }
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(dists[i]));
  }
  if (lx.size() < 4) {
    throw std::invalid_argument("rate_fit: need at least four resolutions with positive distance");
  }
  const LineFit f = fit_line(lx, ly);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r_squared = f.r_squared;
  return r;
}

std::size_t choose_mesh_for_gap(double gap_s) {
  if (!(gap_s >= 0.0)) throw std::invalid_argument("choose_mesh: gap must be >= 0");
  if (gap_s == 0.0) return kMaxMesh;
  const double e = std::ceil(1.5 * std::log2(1.0 / gap_s));
  if (e <= std::log2(static_cast<double>(kMinMesh))) return kMinMesh;
  if (e >= std::log2(static_cast<double>(kMaxMesh))) return kMaxMesh;
  return std::size_t{1} << static_cast<unsigned>(e);
}

std::size_t choose_mesh(double kappa, double kappa_j) {
  return choose_mesh_for_gap(std::abs(std::sqrt(kappa) - std::sqrt(kappa_j)));
}

std::string ContinuityReport::to_csv() const {
  CsvTable t({"j", "kappa_j", "n_j", "sup_dist", "approx_sup_dist"});
  for (const auto& r : rows) {
    t.add_row({static_cast<long long>(r.j), r.kappa_j, static_cast<long long>(r.n_j), r.sup_dist,
               r.approx_sup_dist});
  }
  return t.to_string();
}

std::string ContinuityReport::terms_to_csv() const {
  CsvTable t({"j", "kappa_j", "n_j", "gap_s", "psi", "phi"});
  for (const auto& r : rows) {
    t.add_row({static_cast<long long>(r.j), r.kappa_j, static_cast<long long>(r.n_j),
               std::abs(std::sqrt(kappa) - std::sqrt(r.kappa_j)), r.terms.psi, r.terms.phi});
  }
  return t.to_string();
}

std::string ContinuityReport::to_svg() const {
  PlotSeries ref{"reference sup distance", {}, {}, true};
  PlotSeries approx{"sqrt-interpolated sup distance", {}, {}, true};
  for (const auto& r : rows) {
    if (r.sup_dist > 0.0) {
      ref.x.push_back(static_cast<double>(r.j));
      ref.y.push_back(r.sup_dist);
    }
    if (r.approx_sup_dist > 0.0) {
      approx.x.push_back(static_cast<double>(r.j));
      approx.y.push_back(r.approx_sup_dist);
    }
  }
  PlotOptions opt;
  opt.title = "kappa continuity, kappa = " + format_double(kappa);
  opt.x_label = "j";
  opt.y_label = "sup distance";
  opt.log_y = true;
  const PlotSeries all[] = {ref, approx};
  return svg_plot(all, opt);
}

nlohmann::ordered_json ContinuityReport::meta() const {
  nlohmann::ordered_json j;
  j["kappa"] = kappa;
  j["seed"] = seed;
  j["n_ref"] = n_ref;
  j["eval_knots"] = eval_knots;
  auto& sched = j["n_schedule"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) sched.push_back(r.n_j);
  return j;
}

ContinuityReport continuity_experiment(const ContinuityConfig& cfg) {
  const auto in_range = [](double k) { return k > 0.0 && k < 8.0 / 3.0; };
  if (!in_range(cfg.kappa)) throw std::invalid_argument("continuity_experiment: kappa outside (0, 8/3)");
  for (double k : cfg.kappa_seq) {
    if (!in_range(k)) throw std::invalid_argument("continuity_experiment: kappa_j outside (0, 8/3)");
  }
  if (cfg.fine_resolution % (2 * cfg.eval_knots) != 0) {
    throw MeshMismatch("continuity_experiment: eval mesh must divide the fine resolution");
  }

  ContinuityReport report;
  report.kappa = cfg.kappa;
  report.seed = cfg.seed;
  report.n_ref = cfg.fine_resolution;
  report.eval_knots = cfg.eval_knots;

  const BrownianSample b = sample_brownian(cfg.seed, cfg.fine_resolution, cfg.horizon);
  const TraceOptions topt{0.0, 3, cfg.threads};
  const auto eval_times = knot_midpoint_times(cfg.eval_knots, cfg.horizon);
  const TraceCurve reference = reference_trace(b, cfg.kappa, cfg.fine_resolution, eval_times, topt);
  const DriverPath target_driver = scale_driver(b, cfg.kappa);

  std::map<std::size_t, TraceCurve> approx_target;  // gamma^{n, kappa} by n
  for (std::size_t idx = 0; idx < cfg.kappa_seq.size(); ++idx) {
    ContinuityRow row;
    row.j = idx + 1;
    row.kappa_j = cfg.kappa_seq[idx];
    row.n_j = choose_mesh(cfg.kappa, row.kappa_j);
    row.terms = psi_phi_terms(cfg.kappa, row.kappa_j, static_cast<double>(row.n_j), cfg.beta,
                              cfg.phi, cfg.c_hat, cfg.c);
    row.sup_dist = row.approx_sup_dist = std::numeric_limits<double>::quiet_NaN();
    try {
      auto it = approx_target.find(row.n_j);
      if (it == approx_target.end()) {
        it = approx_target.emplace(row.n_j, build_trace(sqrt_interpolate(target_driver, row.n_j), topt))
                 .first;
      }
      const TraceCurve approx = build_trace(sqrt_interpolate(scale_driver(b, row.kappa_j), row.n_j), topt);
      row.approx_sup_dist = sup_distance(approx, it->second);
      const TraceCurve ref_j = reference_trace(b, row.kappa_j, cfg.fine_resolution, eval_times, topt);
      row.sup_dist = sup_distance(ref_j, reference);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace slelab
