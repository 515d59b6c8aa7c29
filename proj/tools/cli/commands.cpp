#include "commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include "manifest.hpp"
#include "slelab/conformal_maps.hpp"
#include "slelab/driver_paths.hpp"
#include "slelab/errors.hpp"
#include "slelab/io.hpp"
#include "slelab/kappa_analysis.hpp"
#include "slelab/rough_path.hpp"
#include "slelab/trace_engine.hpp"

namespace slelab::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError("not a number: '" + s + "'");
  return v;
}

// Flags of one run, recorded in declaration order.
using Flags = std::vector<std::pair<std::string, std::string>>;

std::string str(double x) { return format_double(x); }
std::string str(std::size_t x) { return std::to_string(x); }
std::string str(std::uint64_t x, int) { return std::to_string(x); }

struct TraceOpts {
  std::uint64_t seed = 42;
  double kappa = 2.0;
  std::size_t n = 256;
  double horizon = 1.0;
  double y_tip = 0.0;
  std::size_t fine = std::size_t{1} << 16;
  std::string format = "csv";
  std::string out;

  Flags flags() const {
    return {{"seed", str(seed, 0)}, {"kappa", str(kappa)}, {"n", str(n)},     {"T", str(horizon)},
            {"y-tip", str(y_tip)}, {"fine", str(fine)},   {"format", format}};
  }
};

struct CompareOpts {
  std::uint64_t seed = 42;
  double kappa = 2.0;
  std::string kappa_seq = "pow2:1..8";
  double horizon = 1.0;
  std::size_t fine = std::size_t{1} << 16;
  std::size_t eval_knots = 1024;
  double beta = 0.5;
  double c_hat = 1.0;
  double c = 1.0;
  double phi_q = 1.0;
  std::string out;

  Flags flags() const {
    return {{"seed", str(seed, 0)},  {"kappa", str(kappa)},   {"kappa-seq", kappa_seq},
            {"T", str(horizon)},     {"fine", str(fine)},     {"eval-knots", str(eval_knots)},
            {"beta", str(beta)},     {"c-hat", str(c_hat)},   {"c", str(c)},
            {"phi-q", str(phi_q)}};
  }
};

struct RoughOpts {
  std::string mode = "lift-check";
  double p = 2.5;
  std::uint64_t seed = 42;
  double kappa = 2.0;
  std::string kappa_seq = "pow2-:1..8";
  std::size_t resolution = 4096;
  std::size_t stride = 1;
  double z0_re = 0.0;
  double z0_im = 1.0;
  double delta = 1e-3;
  std::string out;

  Flags flags() const {
    return {{"mode", mode},          {"p", str(p)},
            {"seed", str(seed, 0)},  {"kappa", str(kappa)},
            {"kappa-seq", kappa_seq}, {"resolution", str(resolution)},
            {"stride", str(stride)}, {"z0-re", str(z0_re)},
            {"z0-im", str(z0_im)},   {"delta", str(delta)}};
  }
};

struct SlitOpts {
  double c = 0.0;
  double tau = 1.0;
  double shift = 0.0;
  std::size_t grid = 21;
  std::string out;

  Flags flags() const {
    return {{"c", str(c)}, {"tau", str(tau)}, {"shift", str(shift)}, {"grid", str(grid)}};
  }
};

RunManifest make_manifest(const std::string& command, Flags flags, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.flags = std::move(flags);
  m.seed = seed;
  return m;
}

void check_kappa_regime(double kappa, const char* what) {
  if (!(kappa > 0.0 && kappa < 8.0 / 3.0)) {
    throw UsageError(std::string(what) + " = " + format_double(kappa) +
                     " is outside (0, 8/3); kappa-continuity of traces is only established there");
  }
}

int cmd_trace(const TraceOpts& o, std::ostream& out) {
  if (!(o.kappa >= 0.0)) throw UsageError("--kappa must be >= 0");
  if (o.n == 0 || o.fine % o.n != 0) throw UsageError("--n must divide --fine");
  if (o.format != "csv" && o.format != "svg" && o.format != "json") {
    throw UsageError("--format must be csv, svg or json");
  }
  const BrownianSample b = sample_brownian(o.seed, o.fine, o.horizon);
  const TraceCurve trace = build_trace(sqrt_interpolate(scale_driver(b, o.kappa), o.n), {o.y_tip, 3, 0});
  OutputDir dir(o.out, make_manifest("trace", o.flags(), o.seed));
  if (o.format == "csv") {
    dir.write("trace.csv", trace_to_csv(trace));
  } else if (o.format == "svg") {
    dir.write("trace.svg", trace_to_svg(trace, "trace, kappa = " + format_double(o.kappa)));
  } else {
    dir.write("trace.json", trace_to_json(trace).dump(2) + "\n");
  }
  dir.finish();
  out << "wrote " << trace.size() << " trace points to " << o.out << "\n";
  return kOk;
}

int cmd_compare(const CompareOpts& o, std::ostream& out, std::ostream& err) {
  check_kappa_regime(o.kappa, "--kappa");
  ContinuityConfig cfg;
  cfg.seed = o.seed;
  cfg.kappa = o.kappa;
  cfg.kappa_seq = parse_kappa_seq(o.kappa_seq, o.kappa);
  for (double k : cfg.kappa_seq) check_kappa_regime(k, "kappa_j");
  cfg.horizon = o.horizon;
  cfg.fine_resolution = o.fine;
  cfg.eval_knots = o.eval_knots;
  cfg.beta = o.beta;
  cfg.c_hat = o.c_hat;
  cfg.c = o.c;
  cfg.phi = Subpower{o.phi_q};
  const ContinuityReport report = continuity_experiment(cfg);
  OutputDir dir(o.out, make_manifest("compare-kappa", o.flags(), o.seed));
  dir.write("continuity.csv", report.to_csv());
  dir.write("error_terms.csv", report.terms_to_csv());
  dir.write("continuity.svg", report.to_svg());
  dir.finish();
  out << report.to_csv();
  int code = kOk;
  for (const auto& r : report.rows) {
    if (r.error) {
      err << "j = " << r.j << ": " << *r.error << "\n";
      code = kNumericalFailure;
    }
  }
  return code;
}

std::string rde_csv_with_analytic(const RdeTrajectory& traj, Complex z0) {
  CsvTable t({"t", "re", "im", "analytic_dev"});
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    Complex exact = std::sqrt(z0 * z0 - 4.0 * traj.times[i]);
    if (exact.imag() < 0.0) exact = -exact;
    t.add_row({traj.times[i], traj.values[i].real(), traj.values[i].imag(), std::abs(traj.values[i] - exact)});
  }
  return t.to_string();
}

int cmd_roughpath(const RoughOpts& o, std::ostream& out) {
  if (!(o.p > 2.0 && o.p <= 3.0)) throw UsageError("--p must lie in (2, 3]");
  if (o.mode != "lift-check" && o.mode != "kappa-continuity" && o.mode != "rde" &&
      o.mode != "rde-continuity") {
    throw UsageError("--mode must be lift-check, kappa-continuity, rde or rde-continuity");
  }
  const BrownianSample b = sample_brownian(o.seed, o.resolution);
  const Complex z0(o.z0_re, o.z0_im);
  OutputDir dir(o.out, make_manifest("roughpath", o.flags(), o.seed));
  if (o.mode == "lift-check") {
    const Level2RoughPath x = Level2RoughPath::lift(b, o.kappa, o.p);
    const auto rows = lift_check(x);
    dir.write("lift_check.csv", lift_check_to_csv(rows));
    CsvTable summary({"metric", "value"});
    double chen = 0.0, geo = 0.0;
    for (const auto& r : rows) {
      chen = std::max(chen, r.chen_residual);
      geo = std::max(geo, r.geometric_residual);
    }
    summary.add_row({std::string("max_chen_residual"), chen});
    summary.add_row({std::string("max_geometric_residual"), geo});
    summary.add_row({std::string("integration_by_parts_residual"), integration_by_parts_residual(x)});
    dir.write("summary.csv", summary.to_string());
    out << summary.to_string();
  } else if (o.mode == "kappa-continuity") {
    const auto seq = parse_kappa_seq(o.kappa_seq, o.kappa);
    const auto table = kappa_lift_continuity(b, o.kappa, seq, o.p, o.stride);
    dir.write("lift_continuity.csv", table.to_csv());
    out << table.to_csv();
  } else if (o.mode == "rde") {
    const auto traj = solve_rde_backward(Level2RoughPath::lift(b, o.kappa, o.p), z0, {o.delta, o.stride});
    dir.write("rde.csv", o.kappa == 0.0 ? rde_csv_with_analytic(traj, z0) : traj.to_csv());
    out << "steps " << traj.values.size() - 1 << ", halvings " << traj.halvings << "\n";
  } else if (o.mode == "rde-continuity") {
    const auto seq = parse_kappa_seq(o.kappa_seq, o.kappa);
    const RdeOptions ropt{o.delta, o.stride};
    const auto krows = rde_kappa_continuity(b, o.kappa, seq, z0, o.p, ropt);
    std::vector<Complex> dz;
    for (int j = 1; j <= 8; ++j) dz.emplace_back(0.0, std::ldexp(1.0, -j));
    const auto zrows = rde_start_continuity(b, o.kappa, z0, dz, o.p, ropt);
    dir.write("rde_kappa.csv", rde_continuity_to_csv(krows, "kappa_n"));
    dir.write("rde_z0.csv", rde_continuity_to_csv(zrows, "perturbation"));
    out << rde_continuity_to_csv(krows, "kappa_n") << rde_continuity_to_csv(zrows, "perturbation");
  } else {
    throw UsageError("--mode must be lift-check, kappa-continuity, rde or rde-continuity");
  }
  dir.finish();
  return kOk;
}

int cmd_slitmap(const SlitOpts& o, std::ostream& out) {
  if (o.grid < 2) throw UsageError("--grid must be >= 2");
  const SlitMapParams p(o.c, o.tau, o.shift);
  CsvTable t({"re", "im", "f_re", "f_im"});
  for (std::size_t i = 0; i < o.grid; ++i) {
    for (std::size_t j = 0; j < o.grid; ++j) {
      const double x = o.shift - 2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(o.grid - 1);
      const double y = 0.1 + 1.9 * static_cast<double>(j) / static_cast<double>(o.grid - 1);
      const HalfPlanePoint f = slit_map_inverse(p, Complex(x, y));
      t.add_row({x, y, f.re(), f.im()});
    }
  }
  OutputDir dir(o.out, make_manifest("slitmap-grid", o.flags(), 0));
  dir.write("slitmap.csv", t.to_string());
  dir.finish();
  out << "alpha = " << format_double(p.alpha()) << ", tip = " << format_double(p.tip().real()) << " + "
      << format_double(p.tip().imag()) << "i\n";
  return kOk;
}

int cmd_replay(const std::string& manifest_path, std::string out_dir, std::ostream& out,
               std::ostream& err) {
  const RunManifest m = read_manifest(manifest_path);
  if (out_dir.empty()) out_dir = (fs::path(manifest_path).parent_path() / "replay").string();
  std::vector<std::string> args{"sle_lab", m.command};
  for (const auto& [k, v] : m.flags) {
    args.push_back("--" + k);
    args.push_back(v);
  }
  args.push_back("--out");
  args.push_back(out_dir);
  std::ostringstream sink;
  const int code = run(args, sink, err);
  if (code != kOk) return code;
  bool same = true;
  for (const auto& o : m.outputs) {
    const std::string digest = sha256_hex(read_file(fs::path(out_dir) / o.file));
    const bool match = digest == o.sha256;
    same = same && match;
    out << (match ? "match " : "DIFF  ") << o.file << " " << digest << "\n";
  }
  return same ? kOk : kNumericalFailure;
}

// Replaces "--config FILE" by the file's key=value pairs as flags placed
// right after the subcommand name.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest, from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] != "--config" && args[i].rfind("--config=", 0) != 0) {
      rest.push_back(args[i]);
      continue;
    }
    std::string file;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      file = args[++i];
    } else {
      file = args[i].substr(9);
    }
    std::istringstream in(read_file(file));
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
      auto trim = [](std::string v) {
        const auto b = v.find_first_not_of(" \t\r");
        const auto e = v.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
      };
      from_file.push_back("--" + trim(line.substr(0, eq)));
      from_file.push_back(trim(line.substr(eq + 1)));
    }
  }
  if (from_file.empty() || rest.size() < 2) return rest;
  std::vector<std::string> out(rest.begin(), rest.begin() + 2);
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + 2, rest.end());
  return out;
}

}  // namespace

std::vector<double> parse_kappa_seq(const std::string& text, double kappa) {
  std::vector<double> seq;
  for (const char* prefix : {"pow2:", "pow2-:"}) {
    const std::string p(prefix);
    if (text.rfind(p, 0) != 0) continue;
    const std::string range = text.substr(p.size());
    const auto dots = range.find("..");
    if (dots == std::string::npos) throw UsageError("kappa sequence range must look like 1..8");
    const int lo = static_cast<int>(parse_double(range.substr(0, dots)));
    const int hi = static_cast<int>(parse_double(range.substr(dots + 2)));
    if (lo > hi) throw UsageError("empty kappa sequence range");
    const double sign = p == "pow2:" ? 1.0 : -1.0;
    for (int j = lo; j <= hi; ++j) seq.push_back(kappa + sign * std::ldexp(1.0, -j));
    return seq;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) seq.push_back(parse_double(item));
  if (seq.empty()) throw UsageError("empty kappa sequence");
  return seq;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sle_lab: square-root Loewner traces, kappa-continuity and rough-path experiments"};
  app.require_subcommand(1);
  app.footer("Any command accepts --config FILE with key=value lines; command-line flags win.");
  // Config entries are inserted before the user's flags; the last occurrence wins.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  TraceOpts trace;
  auto* t = app.add_subcommand("trace", "Build a square-root-interpolated trace");
  t->add_option("--seed", trace.seed, "Brownian seed")->capture_default_str();
  t->add_option("--kappa", trace.kappa, "SLE parameter (>= 0)")->capture_default_str();
  t->add_option("--n", trace.n, "Interpolation knots")->capture_default_str();
  t->add_option("--T", trace.horizon, "Time horizon")->capture_default_str();
  t->add_option("--y-tip", trace.y_tip, "Tip height (0: 1e-3/sqrt(n))")->capture_default_str();
  t->add_option("--fine", trace.fine, "Brownian resolution")->capture_default_str();
  t->add_option("--format", trace.format, "csv, svg or json")->capture_default_str();
  t->add_option("--out", trace.out, "Output directory")->required();

  CompareOpts cmp;
  auto* c = app.add_subcommand("compare-kappa", "Coupled kappa-continuity experiment");
  c->add_option("--seed", cmp.seed)->capture_default_str();
  c->add_option("--kappa", cmp.kappa, "Target kappa in (0, 8/3)")->capture_default_str();
  c->add_option("--kappa-seq", cmp.kappa_seq, "Comma list, pow2:a..b or pow2-:a..b")->capture_default_str();
  c->add_option("--T", cmp.horizon)->capture_default_str();
  c->add_option("--fine", cmp.fine, "Brownian and reference resolution")->capture_default_str();
  c->add_option("--eval-knots", cmp.eval_knots, "Reference comparison mesh")->capture_default_str();
  c->add_option("--beta", cmp.beta, "Derivative exponent for Phi")->capture_default_str();
  c->add_option("--c-hat", cmp.c_hat, "Random constant in Psi")->capture_default_str();
  c->add_option("--c", cmp.c, "Absolute constant in Phi")->capture_default_str();
  c->add_option("--phi-q", cmp.phi_q, "Subpower phi(n) = (log n)^q")->capture_default_str();
  c->add_option("--out", cmp.out, "Output directory")->required();

  RoughOpts rough;
  auto* r = app.add_subcommand("roughpath", "Rough-path lift, continuity and RDE runs");
  r->add_option("--mode", rough.mode, "lift-check, kappa-continuity, rde or rde-continuity")
      ->capture_default_str();
  r->add_option("--p", rough.p, "Variation exponent in (2, 3]")->capture_default_str();
  r->add_option("--seed", rough.seed)->capture_default_str();
  r->add_option("--kappa", rough.kappa)->capture_default_str();
  r->add_option("--kappa-seq", rough.kappa_seq)->capture_default_str();
  r->add_option("--resolution", rough.resolution, "Dyadic Brownian mesh")->capture_default_str();
  r->add_option("--stride", rough.stride, "Coarse step in mesh units")->capture_default_str();
  r->add_option("--z0-re", rough.z0_re)->capture_default_str();
  r->add_option("--z0-im", rough.z0_im)->capture_default_str();
  r->add_option("--delta", rough.delta, "Lower bound for |z0|")->capture_default_str();
  r->add_option("--out", rough.out, "Output directory")->required();

  SlitOpts slit;
  auto* s = app.add_subcommand("slitmap-grid", "Tabulate one slit map on a grid (debugging)");
  s->add_option("--c", slit.c)->capture_default_str();
  s->add_option("--tau", slit.tau)->capture_default_str();
  s->add_option("--shift", slit.shift)->capture_default_str();
  s->add_option("--grid", slit.grid)->capture_default_str();
  s->add_option("--out", slit.out, "Output directory")->required();

  std::string manifest_path, replay_out;
  auto* rp = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  rp->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rp->add_option("--out", replay_out, "Output directory (default: <run>/replay)");

  std::vector<std::string> expanded;
  std::vector<const char*> argv;
  try {
    expanded = expand_config(args);
    for (const auto& a : expanded) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (t->parsed()) return cmd_trace(trace, out);
    if (c->parsed()) return cmd_compare(cmp, out, err);
    if (r->parsed()) return cmd_roughpath(rough, out);
    if (s->parsed()) return cmd_slitmap(slit, out);
    if (rp->parsed()) return cmd_replay(manifest_path, replay_out, out, err);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const SingularInput& e) {
    err << "numerical failure (singular input): " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const SwallowedPoint& e) {
    err << "numerical failure (swallowed point): " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kUsage;
}

}  // namespace slelab::cli
