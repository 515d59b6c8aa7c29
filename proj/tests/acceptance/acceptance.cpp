// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// Usage: slelab_acceptance [--only AC5] [--workdir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "manifest.hpp"
#include "slelab/conformal_maps.hpp"
#include "slelab/driver_paths.hpp"
#include "slelab/io.hpp"
#include "slelab/kappa_analysis.hpp"
#include "slelab/loewner_ode.hpp"
#include "slelab/rough_path.hpp"
#include "slelab/trace_engine.hpp"

using namespace slelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}
std::string g(double x) { return fmt("%.3g", x); }

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Uniform (0, 1) draws from the top 53 bits, independent of the library's distributions.
struct Uniform {
  std::mt19937_64 engine;
  explicit Uniform(std::uint64_t seed) : engine(seed) {}
  double operator()() { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; }
};

std::size_t decrease_violations(const std::vector<double>& v) {
  std::size_t bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) ++bad;
  return bad;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + g(x);
  return s;
}

// The canonical sample for every trace experiment: seed 42 at resolution 2^16.
constexpr std::uint64_t kSeed = 42;
constexpr std::size_t kFine = std::size_t{1} << 16;

Outcome ac1_slit_map_oracle() {
  Timer timer;
  OdeOptions tight;
  tight.atol = tight.rtol = 1e-12;
  double worst = 0.0;
  std::size_t points = 0;
  for (double c : {-3.0, 0.0, 1.0, 3.0}) {
    for (double tau : {0.1, 1.0}) {
      const SlitMapParams p(c, tau, 0.0);
      const auto driver = PiecewiseDriver::sqrt_block(c, tau);
      for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 5; ++j) {
          const Complex w(-2.0 + 4.0 * i / 9.0, 0.1 + 1.9 * j / 4.0);
          const Complex closed = slit_map_inverse(p, w);
          const Complex ode = inverse_ode(driver, w, tau, tight);
          worst = std::max(worst, std::abs(closed - ode));
          ++points;
        }
      }
    }
  }
  const double t = timer.seconds();
  return {worst <= 1e-6 && t < 10.0 && points == 400,
          "max |closed form - ODE| = " + g(worst) + " over " + std::to_string(points) +
              " points (tol 1e-6), " + fmt("%.2f", t) + " s (limit 10 s)"};
}

Outcome ac2_angle_law() {
  // Exact: one block carries c sqrt(t) itself. Interpolated: 256 square-root
  // knots of c sqrt(t), whose angle error decays like 1/n.
  double worst_exact = 0.0, worst_interp = 0.0;
  std::string list;
  const auto times = knot_midpoint_times(64);
  for (double c : {-3.0, 0.0, 3.0}) {
    const double angle = slit_angle(c) * M_PI;
    const auto exact = build_trace(sqrt_interpolate(sqrt_driver(c, 4096), 1), {}, times);
    const auto interp = build_trace(sqrt_interpolate(sqrt_driver(c, 4096), 256), {}, times);
    const double fitted = fit_trace_angle(exact, 0.0);
    worst_exact = std::max(worst_exact, std::abs(fitted - angle));
    worst_interp = std::max(worst_interp, std::abs(fit_trace_angle(interp, 0.0) - angle));
    list += " c=" + g(c) + ":" + fmt("%.6f", fitted) + "/" + fmt("%.6f", angle);
  }
  return {worst_exact <= 1e-3 && worst_interp <= 1e-3,
          "fitted/expected" + list + "; max error " + g(worst_exact) + " rad exact driver, " + g(worst_interp) +
              " rad with 256 knots (tol 1e-3)"};
}

Outcome ac3_capacity() {
  const auto b = sample_brownian(kSeed, kFine);
  double worst = 0.0;
  for (double kappa : {0.0, 1.0, 2.0, 2.5}) {
    for (std::size_t n : {16, 256}) {
      const auto chain = MapChain::from_driver(sqrt_interpolate(scale_driver(b, kappa), n));
      const double rel = std::abs(capacity_coefficient(chain.blocks()) / chain.total_capacity() - 1.0);
      worst = std::max(worst, rel);
    }
  }
  return {worst <= 0.01, "max relative deviation of capacity from 2 sum tau = " + g(worst) + " (tol 1%)"};
}

Outcome ac4_refinement() {
  Timer timer;
  const auto b = sample_brownian(kSeed, kFine);
  const auto driver = scale_driver(b, 2.0);
  std::vector<double> ns, dists;
  for (std::size_t n : {64, 128, 256, 512}) {
    const auto times = knot_midpoint_times(n);
    const auto coarse = build_trace(sqrt_interpolate(driver, n), {}, times);
    const auto fine = build_trace(sqrt_interpolate(driver, 2 * n), {}, times);
    ns.push_back(static_cast<double>(n));
    dists.push_back(sup_distance(fine, coarse));
  }
  const auto fit = rate_fit(ns, dists);
  const std::size_t bad = decrease_violations(dists);

  // beta-hat: sup over kappa and all knots of |f_t'(iy)|, y = 2^-1..2^-4
  const std::size_t nb = 4096;
  std::vector<double> times;
  for (std::size_t k = 0; k <= nb; ++k) times.push_back(static_cast<double>(k) / nb);
  const std::vector<double> kappas{0.5, 1.5, 2.5}, ys{0.5, 0.25, 0.125, 0.0625};
  const auto beta = estimate_beta(b, kappas, times, ys, nb);
  const double rate = theoretical_rate(beta.beta);
  const double t = timer.seconds();
  return {bad <= 1 && fit.slope < 0.0 && t < 300.0,
          "sup|g^2n - g^n| for n=64..512: " + join(dists) + "; violations " + std::to_string(bad) +
              " (max 1); slope " + fmt("%.3f", fit.slope) + " (< 0); report: beta-hat " + fmt("%.3f", beta.beta) +
              (beta.beta > 0.0 && beta.beta < 1.0 ? "" : " (outside (0,1))") + ", theoretical rate " +
              fmt("%.3f", rate) + " vs measured " + fmt("%.3f", -fit.slope) + "; " + fmt("%.1f", t) +
              " s (limit 300 s)"};
}

Outcome ac5_kappa_continuity() {
  Timer timer;
  ContinuityConfig cfg;
  cfg.seed = kSeed;
  cfg.kappa = 2.0;
  cfg.fine_resolution = kFine;
  for (int j = 1; j <= 8; ++j) cfg.kappa_seq.push_back(2.0 + std::ldexp(1.0, -j));
  const auto rep = continuity_experiment(cfg);
  std::vector<double> ref, approx;
  bool errors = false;
  for (const auto& r : rep.rows) {
    ref.push_back(r.sup_dist);
    approx.push_back(r.approx_sup_dist);
    errors = errors || r.error.has_value();
  }
  const std::size_t bad_ref = decrease_violations(ref), bad_approx = decrease_violations(approx);
  const double t = timer.seconds();
  const bool pass = !errors && bad_ref <= 1 && bad_approx <= 1 && ref.back() < 0.05 && approx.back() < 0.05 &&
                    t < 600.0;
  return {pass, "reference column " + join(ref) + " (" + std::to_string(bad_ref) + " violations); approx column " +
                    join(approx) + " (" + std::to_string(bad_approx) + " violations); final < 0.05 required; " +
                    fmt("%.1f", t) + " s (limit 600 s)"};
}

Outcome ac6_closeness_bound() {
  Uniform u(7);
  double worst = 0.0;
  std::size_t over = 0;
  for (int i = 0; i < 100; ++i) {
    const double horizon = 0.05 + 0.95 * u(), y = 0.05 + 0.95 * u();
    const double k1 = 0.1 + 2.5 * u(), k2 = 0.1 + 2.5 * u();
    const std::size_t n = std::size_t{16} << (u.engine() % 5);
    const auto b = sample_brownian(1000 + static_cast<std::uint64_t>(i), 4096, horizon);
    const auto d1 = PiecewiseDriver::from_path(scale_driver(b, k1));
    const auto d2 = PiecewiseDriver::from_path(sqrt_interpolate(scale_driver(b, k2), n));
    const double x1 = 2.0 * u() - 1.0, x2 = x1 + 0.2 * (2.0 * u() - 1.0);
    const auto s = lemma23_check(d1, d2, {x1, y}, {x2, y}, horizon);
    const double ratio = s.measured / s.bound;
    worst = std::max(worst, ratio);
    if (s.measured > 1.05 * s.bound) ++over;
  }
  return {over == 0, "100 coupled configurations, worst measured/bound = " + fmt("%.3f", worst) + ", " +
                         std::to_string(over) + " above 1.05"};
}

Outcome ac7_lift_algebra() {
  const auto x = Level2RoughPath::lift(sample_brownian(kSeed, 1 << 12), 2.0);
  double chen = 0.0, geo = 0.0;
  for (const auto& r : lift_check(x)) {
    chen = std::max(chen, r.chen_residual);
    geo = std::max(geo, r.geometric_residual);
  }
  const double ibp = integration_by_parts_residual(x);
  return {chen <= 1e-12 && geo <= 1e-12 && ibp <= 1e-12,
          "mesh 2^12: Chen " + g(chen) + ", geometric " + g(geo) + ", integration by parts " + g(ibp) +
              " (tol 1e-12)"};
}

Outcome ac8_lift_continuity() {
  const auto b = sample_brownian(kSeed, 1 << 12);
  std::vector<double> seq;
  for (int j = 1; j <= 8; ++j) seq.push_back(2.0 - std::ldexp(1.0, -j));
  const auto tab = kappa_lift_continuity(b, 2.0, seq, 2.5);
  double a_exact_err = 0.0, a_measured_err = 0.0, worst_ratio = 0.0;
  std::vector<double> dp;
  for (const auto& r : tab.rows) {
    const double expect = (std::sqrt(2.0) - std::sqrt(r.kappa_n)) / std::sqrt(2.0);
    a_exact_err = std::max(a_exact_err, std::abs(r.a_n - expect));
    a_measured_err = std::max(a_measured_err, std::abs(r.a_measured - expect));
    worst_ratio = std::max({worst_ratio, r.ratio1, r.ratio2});
    dp.push_back(r.dp);
  }
  return {tab.bound_holds() && a_exact_err == 0.0 && a_measured_err <= 1e-12,
          "C = " + g(tab.c) + " (C0 = " + g(tab.c0) + "), worst ratio " + g(worst_ratio) +
              "; a_n exact (err " + g(a_exact_err) + "), from increments err " + g(a_measured_err) +
              "; d_p: " + join(dp)};
}

Outcome ac9_rde() {
  const Complex i(0.0, 1.0);
  const auto x0 = Level2RoughPath::lift(sample_brownian(kSeed, 1 << 12), 0.0);
  const auto flat = solve_rde_backward(x0, i);
  double dev = 0.0;
  for (std::size_t k = 0; k < flat.values.size(); ++k) {
    dev = std::max(dev, std::abs(flat.values[k] - i * std::sqrt(1.0 + 4.0 * flat.times[k])));
  }
  const auto b = sample_brownian(kSeed, std::size_t{1} << 18);
  const HalfPlanePoint z0(0.0, 0.5);
  const auto em = euler_maruyama_backward(b, 2.0, z0, 16);
  RdeOptions opt;
  opt.stride = 16;
  const auto rde = solve_rde_backward(Level2RoughPath::lift(b, 2.0), z0, opt);
  const double gap = trajectory_sup_distance(rde, em);
  const bool mono = flat.im_nondecreasing() && rde.im_nondecreasing();
  return {dev <= 1e-6 && gap <= 1e-3 && mono,
          "kappa=0 deviation " + g(dev) + " (tol 1e-6); kappa=2 level-2 (2^14 steps) vs 2^18-step EM " + g(gap) +
              " (tol 1e-3); Im nondecreasing: " + (mono ? "yes" : "no") + ", halvings " +
              std::to_string(rde.halvings)};
}

Outcome ac10_rde_continuity() {
  const auto b = sample_brownian(kSeed, 1 << 12);
  const HalfPlanePoint z0(0.0, 1.0);
  std::vector<double> up, down;
  for (int j = 1; j <= 8; ++j) {
    up.push_back(2.0 + std::ldexp(1.0, -j));
    down.push_back(2.0 - std::ldexp(1.0, -j));
  }
  std::vector<Complex> dz;
  for (int j = 1; j <= 8; ++j) dz.emplace_back(0.0, std::ldexp(1.0, -j));
  auto sups = [](const std::vector<RdeContinuityRow>& rows) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.sup_dist);
    return v;
  };
  const auto a = sups(rde_kappa_continuity(b, 2.0, up, z0));
  const auto c = sups(rde_kappa_continuity(b, 2.0, down, z0));
  const auto z = sups(rde_start_continuity(b, 2.0, z0, dz));
  const bool pass = a.back() < 1e-2 && c.back() < 1e-2 && z.back() < 1e-2 && decrease_violations(a) <= 1 &&
                    decrease_violations(c) <= 1 && decrease_violations(z) <= 1;
  return {pass, "kappa+2^-j: " + join(a) + "; kappa-2^-j: " + join(c) + "; z0+2^-j i: " + join(z) +
                    " (final < 1e-2)"};
}

Outcome ac11_determinism(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const std::vector<std::vector<std::string>> runs = {
      {"trace", "--kappa", "2", "--seed", "42", "--n", "256"},
      {"trace", "--kappa", "0", "--n", "64", "--fine", "4096", "--format", "json"},
      {"compare-kappa", "--kappa-seq", "pow2:1..3", "--fine", "8192", "--eval-knots", "128"},
      {"roughpath", "--mode", "lift-check", "--resolution", "1024"},
      {"roughpath", "--mode", "kappa-continuity", "--resolution", "256"},
      {"roughpath", "--mode", "rde", "--resolution", "4096"},
      {"roughpath", "--mode", "rde-continuity", "--resolution", "1024"},
      {"slitmap-grid", "--c", "2"},
  };
  std::size_t matched = 0, files = 0;
  std::string failures;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const fs::path dir = work / ("run" + std::to_string(r));
    std::vector<std::string> args{"sle_lab"};
    args.insert(args.end(), runs[r].begin(), runs[r].end());
    args.push_back("--out");
    args.push_back(dir.string());
    std::ostringstream out, err;
    if (cli::run(args, out, err) != cli::kOk) {
      failures += " " + runs[r][0] + "(run failed: " + err.str() + ")";
      continue;
    }
    const auto manifest = cli::read_manifest(dir / cli::kManifestName);
    std::ostringstream rout, rerr;
    const int code = cli::run({"sle_lab", "replay", "--manifest", (dir / cli::kManifestName).string(), "--out",
                               (dir / "replay").string()},
                              rout, rerr);
    bool same = code == cli::kOk;
    for (const auto& o : manifest.outputs) {
      ++files;
      same = same && read_file(dir / o.file) == read_file(dir / "replay" / o.file);
    }
    if (same) {
      ++matched;
    } else {
      failures += " " + runs[r][0];
    }
  }
  fs::remove_all(work);
  return {matched == runs.size(),
          std::to_string(matched) + "/" + std::to_string(runs.size()) + " commands replayed byte-identically (" +
              std::to_string(files) + " files)" + (failures.empty() ? "" : "; failed:" + failures)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  fs::path work = fs::temp_directory_path() / "slelab_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else if (a == "--workdir" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: slelab_acceptance [--only ACn] [--workdir DIR]\n";
      return 2;
    }
  }

  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "slit-map oracle", ac1_slit_map_oracle},
      {"AC2", "angle law", ac2_angle_law},
      {"AC3", "capacity additivity", ac3_capacity},
      {"AC4", "refinement decay", ac4_refinement},
      {"AC5", "kappa-continuity of traces", ac5_kappa_continuity},
      {"AC6", "closeness bound dominance", ac6_closeness_bound},
      {"AC7", "rough-path algebra", ac7_lift_algebra},
      {"AC8", "lift continuity in kappa", ac8_lift_continuity},
      {"AC9", "RDE correctness", ac9_rde},
      {"AC10", "RDE kappa-continuity", ac10_rde_continuity},
      {"AC11", "determinism", [&] { return ac11_determinism(work); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.id) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.details << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
