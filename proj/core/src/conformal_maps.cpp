#include "slelab/conformal_maps.hpp"

#include <cmath>
#include <stdexcept>

#include "slelab/errors.hpp"

namespace slelab {

double slit_angle(double c) { return 0.5 - 0.5 * c / std::sqrt(16.0 + c * c); }

SlitMapParams::SlitMapParams(double c, double tau, double shift)
    : c_(c), tau_(tau), shift_(shift), alpha_(slit_angle(c)) {
  if (!std::isfinite(c) || !std::isfinite(shift)) {
    throw std::invalid_argument("SlitMapParams: non-finite coefficient or shift");
  }
  if (!(tau >= 0.0)) throw std::invalid_argument("SlitMapParams: tau must be >= 0");
  const double s = std::sqrt(16.0 + c * c);
  const double root = std::sqrt(tau);
  // s - c and s + c without cancellation.
  const double minus = c > 0 ? 16.0 / (s + c) : s - c;
  const double plus = c < 0 ? 16.0 / (s - c) : s + c;
  a_ = -0.5 * root * minus;
  b_ = 0.5 * root * plus;
}

namespace detail {

Complex apply_block(const SlitMapParams& p, Complex w) noexcept {
  // shift + (w-A)^(1-alpha) (w-B)^alpha with (w-A)^(1-alpha) (w-B)^alpha =
  // (w-A) ((w-B)/(w-A))^alpha; the ratio has
  // argument arg(w-B) - arg(w-A) in [0, pi] on closed H.
  const Complex wa = w - p.left_branch();
  const Complex wb = w - p.right_branch();
  if (p.tau() == 0.0) return w;
  return p.shift() + wa * std::exp(p.alpha() * log_upper(wb / wa));
}

Complex block_derivative(const SlitMapParams& p, Complex w) noexcept {
  if (p.tau() == 0.0) return {1.0, 0.0};
  const Complex wa = w - p.left_branch();
  const Complex wb = w - p.right_branch();
  const Complex power = wa * std::exp(p.alpha() * log_upper(wb / wa));
  return power * ((1.0 - p.alpha()) / wa + p.alpha() / wb);
}

}  // namespace detail

Complex SlitMapParams::tip() const noexcept {
  return detail::apply_block(*this, Complex(tip_preimage(), 0.0));
}

namespace {

void check_block_input(const SlitMapParams& p, Complex w, std::optional<std::size_t> stage) {
  const double scale = 1e-14 * (1.0 + std::abs(w));
  if (w.imag() <= scale && p.tau() > 0.0 &&
      (std::abs(w - p.left_branch()) <= scale || std::abs(w - p.right_branch()) <= scale)) {
    throw SingularInput("slit map evaluated at a branch point", stage);
  }
}

}  // namespace

HalfPlanePoint slit_map_inverse(const SlitMapParams& p, HalfPlanePoint w) {
  check_block_input(p, w, std::nullopt);
  return detail::apply_block(p, w);
}

Complex slit_map_inverse_derivative(const SlitMapParams& p, HalfPlanePoint w) {
  check_block_input(p, w, std::nullopt);
  return detail::block_derivative(p, w);
}

MapChain MapChain::from_driver(const DriverPath& d) {
  if (d.meta().kind != DriverKind::sqrt_interpolated) {
    throw std::invalid_argument("MapChain::from_driver: driver must be sqrt-interpolated");
  }
  const std::size_t n = d.meta().knots;
  const std::size_t ratio = d.resolution() / n;
  const double tau = d.horizon() / static_cast<double>(n);
  const double root = std::sqrt(tau);
  std::vector<SlitMapParams> blocks;
  blocks.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = d[k * ratio];
    blocks.emplace_back((d[(k + 1) * ratio] - left) / root, tau, left);
  }
  return MapChain(std::move(blocks));
}

double MapChain::duration() const noexcept {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.tau();
  return t;
}

nlohmann::ordered_json MapChain::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& b : blocks_) {
    nlohmann::ordered_json e;
    e["c"] = b.c();
    e["tau"] = b.tau();
    e["shift"] = b.shift();
    arr.push_back(std::move(e));
  }
  return arr;
}

MapChain MapChain::from_json(const nlohmann::json& j) {
  std::vector<SlitMapParams> blocks;
  for (const auto& e : j) {
    blocks.emplace_back(e.at("c").get<double>(), e.at("tau").get<double>(),
                        e.at("shift").get<double>());
  }
  return MapChain(std::move(blocks));
}

HalfPlanePoint compose_chain(std::span<const SlitMapParams> blocks, HalfPlanePoint w) {
  Complex z = w;
  for (std::size_t i = blocks.size(); i-- > 0;) {
    check_block_input(blocks[i], z, i);
    z = detail::apply_block(blocks[i], z);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw SingularInput("non-finite value while composing slit maps", i);
    }
  }
  return z;
}

Complex map_derivative(std::span<const SlitMapParams> blocks, HalfPlanePoint w) {
  if (!(w.im() > 0.0)) throw std::invalid_argument("map_derivative: Im w must be > 0");
  Complex z = w;
  Complex d{1.0, 0.0};
  for (std::size_t i = blocks.size(); i-- > 0;) {
    d *= detail::block_derivative(blocks[i], z);
    z = detail::apply_block(blocks[i], z);
  }
  return d;
}

double capacity_coefficient(std::span<const SlitMapParams> blocks, double radius) {
  // C(R) = -(f(iR) - iR) iR = C + O(1/R); Richardson with R and 2R.
  auto coeff = [&](double r) {
    const Complex w(0.0, r);
    return (-(compose_chain(blocks, w).z() - w) * w).real();
  };
  return 2.0 * coeff(2.0 * radius) - coeff(radius);
}

}  // namespace slelab
