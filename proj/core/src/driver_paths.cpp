#include "slelab/driver_paths.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

#include "slelab/errors.hpp"
#include "slelab/io.hpp"

namespace slelab {

std::string_view to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::raw_brownian: return "raw-brownian";
    case DriverKind::sqrt_interpolated: return "sqrt-interpolated";
    case DriverKind::analytic: return "analytic";
  }
  return "unknown";
}

DriverKind driver_kind_from_string(std::string_view name) {
  if (name == "raw-brownian") return DriverKind::raw_brownian;
  if (name == "sqrt-interpolated") return DriverKind::sqrt_interpolated;
  if (name == "analytic") return DriverKind::analytic;
  throw std::invalid_argument("unknown driver kind: " + std::string(name));
}

DriverPath::DriverPath(double horizon, std::vector<double> values, DriverMeta meta)
    : horizon_(horizon), values_(std::move(values)), meta_(meta) {
  if (!(horizon_ > 0.0)) throw std::invalid_argument("DriverPath: horizon must be > 0");
  if (values_.size() < 2) throw std::invalid_argument("DriverPath: need at least two samples");
  if (meta_.kind == DriverKind::sqrt_interpolated &&
      (meta_.knots == 0 || resolution() % meta_.knots != 0)) {
    throw MeshMismatch("DriverPath: knot count must divide the resolution");
  }
}

std::vector<double> DriverPath::times() const {
  std::vector<double> t(values_.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = time(i);
  return t;
}

double DriverPath::sup_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

DriverPath sqrt_driver(double c, std::size_t n, double horizon) {
  if (n == 0) throw std::invalid_argument("sqrt_driver: n must be >= 1");
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    v[i] = c * std::sqrt(static_cast<double>(i) / static_cast<double>(n)) * std::sqrt(horizon);
  }
  return DriverPath(horizon, std::move(v), DriverMeta{0, 0.0, DriverKind::analytic, 0});
}

double NormalGenerator::uniform_open() {
  // 53 random bits -> (0, 1]; never 0 so the logarithm below is finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalGenerator::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double theta = 2.0 * std::numbers::pi * uniform_open();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

BrownianSample::BrownianSample(std::uint64_t seed, double horizon, std::vector<double> increments)
    : seed_(seed), horizon_(horizon), increments_(std::move(increments)) {
  values_.resize(increments_.size() + 1);
  values_[0] = 0.0;
  for (std::size_t i = 0; i < increments_.size(); ++i) values_[i + 1] = values_[i] + increments_[i];
}

BrownianSample sample_brownian(std::uint64_t seed, std::size_t n, double horizon) {
  if (n == 0) throw std::invalid_argument("sample_brownian: n must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_brownian: horizon must be > 0");
  NormalGenerator normal(seed);
  const double scale = std::sqrt(horizon / static_cast<double>(n));
  std::vector<double> inc(n);
  for (auto& x : inc) x = scale * normal();
  return BrownianSample(seed, horizon, std::move(inc));
}

DriverPath scale_driver(const BrownianSample& b, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("scale_driver: kappa must be >= 0");
  const double s = std::sqrt(kappa);
  std::vector<double> v(b.values().begin(), b.values().end());
  for (auto& x : v) x *= s;
  return DriverPath(b.horizon(), std::move(v),
                    DriverMeta{b.seed(), kappa, DriverKind::raw_brownian, 0});
}

DriverPath sqrt_interpolate(const DriverPath& d, std::size_t n) {
  const std::size_t fine = d.resolution();
  if (n == 0 || fine % n != 0) {
    throw MeshMismatch("sqrt_interpolate: coarse resolution " + std::to_string(n) +
                       " does not divide fine resolution " + std::to_string(fine));
  }
  const std::size_t ratio = fine / n;
  std::vector<double> out(fine + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = d[k * ratio];
    const double inc = d[(k + 1) * ratio] - left;
    out[k * ratio] = left;
    for (std::size_t j = 1; j < ratio; ++j) {
      out[k * ratio + j] =
          left + inc * std::sqrt(static_cast<double>(j) / static_cast<double>(ratio));
    }
  }
  out[fine] = d[fine];
  DriverMeta meta = d.meta();
  meta.kind = DriverKind::sqrt_interpolated;
  meta.knots = n;
  return DriverPath(d.horizon(), std::move(out), meta);
}

double osc(const DriverPath& d, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("osc: delta must be > 0");
  const auto v = d.values();
  // Mesh pairs (i, j) with (j - i) h <= delta, up to rounding of delta / h.
  const double steps = std::floor(delta / d.step() * (1.0 + 1e-12));
  const std::size_t w = static_cast<std::size_t>(std::min(steps, static_cast<double>(v.size() - 1)));
  if (w == 0) return 0.0;

  // Sliding-window max and min over windows of w + 1 consecutive samples.
  std::deque<std::size_t> maxq, minq;
  double best = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    while (!maxq.empty() && v[maxq.back()] <= v[j]) maxq.pop_back();
    while (!minq.empty() && v[minq.back()] >= v[j]) minq.pop_back();
    maxq.push_back(j);
    minq.push_back(j);
    while (maxq.front() + w < j) maxq.pop_front();
    while (minq.front() + w < j) minq.pop_front();
    best = std::max(best, v[maxq.front()] - v[minq.front()]);
  }
  return best;
}

double Subpower::operator()(double n) const { return std::pow(std::log(n), q); }

double DriverPiece::at(double t) const noexcept {
  const double s = std::max(t - t0, 0.0);
  return shift + sqrt_coef * std::sqrt(s) + slope * s;
}

PiecewiseDriver::PiecewiseDriver(std::vector<DriverPiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("PiecewiseDriver: no pieces");
  const double len = pieces_.front().t1 - pieces_.front().t0;
  uniform_ = pieces_.front().t0 == 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (!(p.t1 > p.t0)) throw std::invalid_argument("PiecewiseDriver: empty piece");
    if (i > 0 && p.t0 != pieces_[i - 1].t1) {
      throw std::invalid_argument("PiecewiseDriver: pieces must be contiguous");
    }
    if (std::abs((p.t1 - p.t0) - len) > 1e-12 * len) uniform_ = false;
  }
}

std::size_t PiecewiseDriver::piece_index(double t) const noexcept {
  const std::size_t n = pieces_.size();
  if (t <= pieces_.front().t0) return 0;
  if (t >= pieces_.back().t0) return n - 1;
  std::size_t guess = n - 1;
  if (uniform_) {
    guess = std::min(n - 1, static_cast<std::size_t>(t / horizon() * static_cast<double>(n)));
    // Correct for rounding at piece boundaries.
    while (guess > 0 && t < pieces_[guess].t0) --guess;
    while (guess + 1 < n && t >= pieces_[guess + 1].t0) ++guess;
    return guess;
  }
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double value, const DriverPiece& p) { return value < p.t0; });
  return static_cast<std::size_t>(std::distance(pieces_.begin(), it)) - 1;
}

PiecewiseDriver PiecewiseDriver::from_path(const DriverPath& d) {
  std::vector<DriverPiece> pieces;
  if (d.meta().kind == DriverKind::sqrt_interpolated) {
    const std::size_t n = d.meta().knots;
    const std::size_t ratio = d.resolution() / n;
    const double tau = d.horizon() / static_cast<double>(n);
    pieces.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double left = d[k * ratio];
      const double inc = d[(k + 1) * ratio] - left;
      pieces.push_back({d.time(k * ratio), d.time((k + 1) * ratio), left, inc / std::sqrt(tau), 0.0});
    }
  } else {
    pieces.reserve(d.resolution());
    const double h = d.step();
    for (std::size_t i = 0; i < d.resolution(); ++i) {
      pieces.push_back({d.time(i), d.time(i + 1), d[i], 0.0, (d[i + 1] - d[i]) / h});
    }
  }
  return PiecewiseDriver(std::move(pieces));
}

PiecewiseDriver PiecewiseDriver::sqrt_block(double c, double horizon, double shift) {
  return PiecewiseDriver({DriverPiece{0.0, horizon, shift, c, 0.0}});
}

std::string driver_to_csv(const DriverPath& d) {
  CsvTable table({"t", "value"});
  for (std::size_t i = 0; i <= d.resolution(); ++i) table.add_row({d.time(i), d[i]});
  return table.to_string();
}

nlohmann::ordered_json driver_manifest(const DriverPath& d) {
  nlohmann::ordered_json j;
  j["seed"] = d.meta().seed;
  j["kappa"] = d.meta().kappa;
  j["n"] = d.resolution();
  j["T"] = d.horizon();
  j["kind"] = std::string(to_string(d.meta().kind));
  if (d.meta().kind == DriverKind::sqrt_interpolated) j["knots"] = d.meta().knots;
  return j;
}

}  // namespace slelab
