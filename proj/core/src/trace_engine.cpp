#include "slelab/trace_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slelab/errors.hpp"
#include "slelab/io.hpp"
#include "slelab/parallel.hpp"

namespace slelab {

double default_y_tip(std::size_t n) { return 1e-3 / std::sqrt(static_cast<double>(n)); }

std::vector<double> knot_midpoint_times(std::size_t n, double horizon) {
  std::vector<double> t(2 * n + 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(2 * n);
  }
  return t;
}

namespace {

// Cumulative block start times of a chain.
std::vector<double> block_starts(const MapChain& chain) {
  std::vector<double> starts(chain.size() + 1, 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) starts[i + 1] = starts[i] + chain.blocks()[i].tau();
  return starts;
}

struct Location {
  std::size_t block;  // index of the (possibly truncated) innermost block
  double offset;      // time elapsed inside it
};

Location locate(std::span<const double> starts, double t) {
  const std::size_t m = starts.size() - 1;
  if (m == 0) throw std::invalid_argument("trace of an empty chain");
  const double total = starts[m];
  if (t < -1e-12 * total || t > total * (1.0 + 1e-12)) {
    throw std::invalid_argument("trace time outside the chain's duration");
  }
  if (t >= total) return {m - 1, starts[m] - starts[m - 1]};
  auto it = std::upper_bound(starts.begin(), starts.end() - 1, t);
  const std::size_t k = static_cast<std::size_t>(it - starts.begin()) - 1;
  // Snap to a knot when t is a rounding error away from it.
  const double tau = starts[k + 1] - starts[k];
  double s = t - starts[k];
  if (s < 1e-12 * tau) s = 0.0;
  return {k, s};
}

// Compose blocks [first, loc.block) then the truncated innermost block,
// evaluated just above the preimage of the current tip.
Complex tip_image(std::span<const SlitMapParams> blocks, std::size_t first, Location loc, double y) {
  const SlitMapParams& inner = blocks[loc.block];
  Complex z;
  if (loc.offset > 0.0) {
    const SlitMapParams partial = inner.truncated(loc.offset);
    z = detail::apply_block(partial, Complex(partial.tip_preimage(), y));
  } else {
    z = Complex(inner.shift(), y);
  }
  return compose_chain(blocks.subspan(first, loc.block - first), z);
}

Complex tip_image_with_retry(std::span<const SlitMapParams> blocks, std::size_t first, Location loc,
                             double y, std::size_t retries) {
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      const Complex z = tip_image(blocks, first, loc, y);
      if (std::isfinite(z.real()) && std::isfinite(z.imag())) return z;
    } catch (const SingularInput&) {
      if (attempt >= retries) throw;
    }
    if (attempt >= retries) {
      throw NumericalFailure("trace evaluation stayed singular after " + std::to_string(retries) +
                             " retries");
    }
    y *= 2.0;
  }
}

}  // namespace

HalfPlanePoint trace_point(const MapChain& chain, double t, double y_tip) {
  const auto starts = block_starts(chain);
  return tip_image(chain.blocks(), 0, locate(starts, t), y_tip);
}

TraceCurve build_trace(const MapChain& chain, const TraceMeta& meta, std::span<const double> times,
                       const TraceOptions& options) {
  TraceCurve curve;
  curve.meta = meta;
  curve.meta.y_tip = options.y_tip > 0.0 ? options.y_tip : default_y_tip(std::max<std::size_t>(meta.n, 1));
  curve.times.assign(times.begin(), times.end());
  std::vector<Complex> pts(times.size());
  const auto starts = block_starts(chain);
  const auto blocks = chain.blocks();
  const double y = curve.meta.y_tip;
  parallel_for(
      times.size(),
      [&](std::size_t i) {
        pts[i] = tip_image_with_retry(blocks, 0, locate(starts, times[i]), y, options.max_retries);
      },
      options.threads);
  curve.points.assign(pts.begin(), pts.end());
  return curve;
}

TraceCurve build_trace(const DriverPath& interpolated, const TraceOptions& options,
                       std::optional<std::vector<double>> times) {
  if (interpolated.meta().kind != DriverKind::sqrt_interpolated) {
    throw std::invalid_argument("build_trace: driver must be sqrt-interpolated");
  }
  const std::size_t n = interpolated.meta().knots;
  const MapChain chain = MapChain::from_driver(interpolated);
  const std::vector<double> t = times ? std::move(*times) : knot_midpoint_times(n, interpolated.horizon());
  const TraceMeta meta{interpolated.meta().kappa, n, interpolated.meta().seed, 0.0};
  return build_trace(chain, meta, t, options);
}

TraceCurve reference_trace(const BrownianSample& b, double kappa, std::size_t n_ref,
                           std::span<const double> times, const TraceOptions& options) {
  const DriverPath interp = sqrt_interpolate(scale_driver(b, kappa), n_ref);
  const MapChain chain = MapChain::from_driver(interp);
  const TraceMeta meta{kappa, n_ref, b.seed(), 0.0};
  return build_trace(chain, meta, times, options);
}

double sup_distance(const TraceCurve& a, const TraceCurve& b) {
  if (a.times.size() != b.times.size()) throw MeshMismatch("sup_distance: different time grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * (1.0 + std::abs(a.times[i]))) {
      throw MeshMismatch("sup_distance: different time grids");
    }
    d = std::max(d, std::abs(a.points[i].z() - b.points[i].z()));
  }
  return d;
}

double fit_trace_angle(const TraceCurve& trace, double origin) {
  // Principal axis of sum p p^T over points p = gamma - origin.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : trace.points) {
    const double x = p.re() - origin, y = p.im();
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (theta < 0.0) theta += std::numbers::pi;
  return theta;
}

bool TipBox::contains(Complex z) const noexcept {
  const double root = std::sqrt(static_cast<double>(n));
  return std::abs(z.real()) <= phi_n / root && z.imag() >= 1.0 / (root * phi_n) &&
         z.imag() <= c / root;
}

std::vector<Complex> mapped_forward_curve(const MapChain& chain, double t_k,
                                          std::span<const double> offsets, double y_tip) {
  const auto starts = block_starts(chain);
  const auto blocks = chain.blocks();
  const Location origin = locate(starts, t_k);
  if (origin.offset != 0.0) {
    throw std::invalid_argument("mapped_forward_curve: t_k must be a block boundary of the chain");
  }
  const double lambda_k = blocks[origin.block].shift();
  std::vector<Complex> out;
  out.reserve(offsets.size());
  for (double s : offsets) {
    const Location loc = locate(starts, t_k + s);
    out.push_back(tip_image(blocks, origin.block, loc, y_tip) - lambda_k);
  }
  return out;
}

BoxReport tip_box_check(const MapChain& chain, std::size_t n, std::size_t k, const TipBox& box,
                        BoxMode mode, std::size_t samples, double y_tip) {
  BoxReport report;
  report.degenerate = box.degenerate();
  if (report.degenerate) return report;
  if (n == 0 || k + 1 >= n) throw std::invalid_argument("tip_box_check: need k <= n - 2");
  if (samples < 2) throw std::invalid_argument("tip_box_check: need at least two samples");
  const double horizon = chain.duration();
  const double tau = horizon / static_cast<double>(n);
  const double lo = mode == BoxMode::exists ? 0.0 : tau;
  const double hi = 2.0 * tau;
  std::vector<double> offsets(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    offsets[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
  }
  const double y = y_tip > 0.0 ? y_tip : default_y_tip(chain.size());
  const auto curve = mapped_forward_curve(chain, tau * static_cast<double>(k), offsets, y);
  report.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    if (box.contains(curve[i])) {
      ++report.inside;
      if (!report.witness) report.witness = offsets[i];
    } else if (!report.first_violation) {
      report.first_violation = offsets[i];
    }
  }
  report.satisfied = mode == BoxMode::exists ? report.inside > 0 : report.inside == samples;
  return report;
}

std::vector<ModulusPoint> modulus_scan(const TraceCurve& trace, std::span<const double> ys) {
  std::vector<ModulusPoint> out;
  const auto& t = trace.times;
  for (double y : ys) {
    const double window = y * y;
    double best = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t j = i + 1; j < t.size() && t[j] - t[i] <= window * (1.0 + 1e-12); ++j) {
        best = std::max(best, std::abs(trace.points[j].z() - trace.points[i].z()));
      }
    }
    out.push_back({y, best});
  }
  return out;
}

std::string trace_to_csv(const TraceCurve& trace) {
  CsvTable table({"t", "re", "im"});
  for (std::size_t i = 0; i < trace.size(); ++i) {
    table.add_row({trace.times[i], trace.points[i].re(), trace.points[i].im()});
  }
  return table.to_string();
}

std::string trace_to_svg(const TraceCurve& trace, const std::string& title) {
  PlotSeries s;
  s.label = "kappa=" + format_double(trace.meta.kappa) + " n=" + std::to_string(trace.meta.n);
  for (const auto& p : trace.points) {
    s.x.push_back(p.re());
    s.y.push_back(p.im());
  }
  PlotOptions opt;
  opt.title = title;
  opt.x_label = "Re";
  opt.y_label = "Im";
  opt.equal_aspect = true;
  const PlotSeries all[] = {s};
  return svg_plot(all, opt);
}

nlohmann::ordered_json trace_manifest(const TraceCurve& trace) {
  nlohmann::ordered_json j;
  j["kappa"] = trace.meta.kappa;
  j["n"] = trace.meta.n;
  j["seed"] = trace.meta.seed;
  j["y_tip"] = trace.meta.y_tip;
  j["points"] = trace.size();
  return j;
}

nlohmann::ordered_json trace_to_json(const TraceCurve& trace) {
  nlohmann::ordered_json j;
  auto t = nlohmann::ordered_json::array();
  auto re = nlohmann::ordered_json::array();
  auto im = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    t.push_back(trace.times[i]);
    re.push_back(trace.points[i].re());
    im.push_back(trace.points[i].im());
  }
  // ordered_json keeps members in a vector, so build the arrays before inserting
  j["meta"] = trace_manifest(trace);
  j["t"] = std::move(t);
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

}  // namespace slelab
