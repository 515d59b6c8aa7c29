#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "manifest.hpp"
#include "slelab/io.hpp"

namespace fs = std::filesystem;
using namespace slelab;
using namespace slelab::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sle_lab(std::vector<std::string> args) {
  args.insert(args.begin(), "sle_lab");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("slelab_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

std::string flag_value(const RunManifest& m, const std::string& key) {
  for (const auto& [k, v] : m.flags)
    if (k == key) return v;
  return {};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
  CHECK(sle_lab({}).code == kUsage);
  CHECK(sle_lab({"bogus"}).code == kUsage);
  CHECK(sle_lab({"trace"}).code == kUsage);  // --out is required
  CHECK(sle_lab({"--help"}).code == kOk);
  TempDir tmp("usage");
  CHECK(sle_lab({"trace", "--out", tmp / "t", "--kappa", "abc"}).code == kUsage);
  CHECK(sle_lab({"trace", "--out", tmp / "t", "--n", "3", "--fine", "1024"}).code == kUsage);
  CHECK(sle_lab({"trace", "--out", tmp / "t", "--format", "png"}).code == kUsage);
}

TEST_CASE("trace writes csv with a manifest") {
  TempDir tmp("trace");
  const auto r = sle_lab({"trace", "--kappa", "2", "--n", "16", "--fine", "1024", "--out", tmp / "run"});
  REQUIRE(r.code == kOk);
  const auto csv = CsvTable::parse(read_file(tmp / "run/trace.csv"));
  CHECK(csv.header() == std::vector<std::string>{"t", "re", "im"});
  CHECK(csv.rows().size() == 33);
  const auto m = read_manifest(tmp / "run/manifest.json");
  CHECK(m.command == "trace");
  CHECK(m.seed == 42);
  REQUIRE(m.outputs.size() == 1);
  CHECK(m.outputs[0].file == "trace.csv");
  CHECK(m.outputs[0].sha256 == sha256_hex(read_file(tmp / "run/trace.csv")));
  CHECK(!m.tool_version.empty());

  CHECK(sle_lab({"trace", "--n", "16", "--fine", "1024", "--format", "svg", "--out", tmp / "svg"}).code == kOk);
  CHECK(read_file(tmp / "svg/trace.svg").find("<svg") != std::string::npos);
  CHECK(sle_lab({"trace", "--n", "16", "--fine", "1024", "--format", "json", "--out", tmp / "json"}).code == kOk);
  CHECK(fs::exists(tmp / "json/trace.json"));
}

TEST_CASE("runs are deterministic and replayable") {
  TempDir tmp("replay");
  REQUIRE(sle_lab({"trace", "--seed", "7", "--n", "32", "--fine", "2048", "--out", tmp / "a"}).code == kOk);
  REQUIRE(sle_lab({"trace", "--seed", "7", "--n", "32", "--fine", "2048", "--out", tmp / "b"}).code == kOk);
  CHECK(read_file(tmp / "a/trace.csv") == read_file(tmp / "b/trace.csv"));
  const auto r = sle_lab({"replay", "--manifest", tmp / "a/manifest.json"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("match trace.csv") != std::string::npos);
  CHECK(read_file(tmp / "a/replay/trace.csv") == read_file(tmp / "a/trace.csv"));

  // a tampered output no longer matches its recorded digest
  write_file_atomic(tmp / "b/trace.csv", "t,re,im\n");
  auto m = read_manifest(tmp / "b/manifest.json");
  m.outputs[0].sha256 = sha256_hex("t,re,im\n");
  write_file_atomic(tmp / "b/manifest.json", m.to_json().dump(2));
  const auto bad = sle_lab({"replay", "--manifest", tmp / "b/manifest.json", "--out", tmp / "b2"});
  CHECK(bad.code == kNumericalFailure);
  CHECK(bad.out.find("DIFF") != std::string::npos);
}

TEST_CASE("compare-kappa refuses kappa outside (0, 8/3)") {
  TempDir tmp("compare");
  const auto r = sle_lab({"compare-kappa", "--kappa", "3", "--out", tmp / "c"});
  CHECK(r.code == kUsage);
  CHECK(r.err.find("8/3") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "c/continuity.csv"));
  CHECK(sle_lab({"compare-kappa", "--kappa", "2", "--kappa-seq", "2.5,3.0", "--out", tmp / "c"}).code == kUsage);
}

TEST_CASE("compare-kappa on a small sample") {
  TempDir tmp("compare_small");
  const auto r = sle_lab({"compare-kappa", "--kappa", "2", "--kappa-seq", "pow2:1..2", "--fine", "4096",
                          "--eval-knots", "64", "--out", tmp / "c"});
  REQUIRE(r.code == kOk);
  const auto csv = CsvTable::parse(read_file(tmp / "c/continuity.csv"));
  CHECK(csv.header() == std::vector<std::string>{"j", "kappa_j", "n_j", "sup_dist", "approx_sup_dist"});
  CHECK(csv.rows().size() == 2);
  CHECK(fs::exists(tmp / "c/error_terms.csv"));
  CHECK(fs::exists(tmp / "c/continuity.svg"));
}

TEST_CASE("roughpath modes") {
  TempDir tmp("rough");
  CHECK(sle_lab({"roughpath", "--p", "3.5", "--out", tmp / "p"}).code == kUsage);
  CHECK(sle_lab({"roughpath", "--p", "2", "--out", tmp / "p"}).code == kUsage);
  CHECK(sle_lab({"roughpath", "--mode", "nope", "--out", tmp / "m"}).code == kUsage);
  CHECK_FALSE(fs::exists(tmp / "m"));

  REQUIRE(sle_lab({"roughpath", "--mode", "lift-check", "--resolution", "256", "--out", tmp / "l"}).code == kOk);
  CHECK(fs::exists(tmp / "l/lift_check.csv"));
  CHECK(fs::exists(tmp / "l/summary.csv"));
  REQUIRE(sle_lab({"roughpath", "--mode", "rde", "--kappa", "0", "--resolution", "256", "--out", tmp / "r"}).code ==
          kOk);
  const auto rde = CsvTable::parse(read_file(tmp / "r/rde.csv"));
  CHECK(rde.column("analytic_dev") == 3);
  CHECK(sle_lab({"roughpath", "--mode", "rde", "--z0-im", "1e-5", "--resolution", "256", "--out", tmp / "z"}).code ==
        kUsage);
  REQUIRE(sle_lab({"roughpath", "--mode", "kappa-continuity", "--resolution", "128", "--kappa-seq", "pow2-:1..3",
                   "--out", tmp / "k"})
              .code == kOk);
  CHECK(CsvTable::parse(read_file(tmp / "k/lift_continuity.csv")).rows().size() == 3);
  REQUIRE(sle_lab({"roughpath", "--mode", "rde-continuity", "--resolution", "256", "--out", tmp / "c"}).code == kOk);
  CHECK(fs::exists(tmp / "c/rde_kappa.csv"));
  CHECK(fs::exists(tmp / "c/rde_z0.csv"));
}

TEST_CASE("slit map grid") {
  TempDir tmp("slit");
  REQUIRE(sle_lab({"slitmap-grid", "--c", "1", "--grid", "5", "--out", tmp / "s"}).code == kOk);
  CHECK(fs::exists(tmp / "s/slitmap.csv"));
}

TEST_CASE("config files are overridden by flags") {
  TempDir tmp("config");
  write_file_atomic(tmp / "run.cfg", "# trace settings\nkappa = 1.5\nn=16\nfine = 1024\n");
  REQUIRE(sle_lab({"trace", "--config", tmp / "run.cfg", "--out", tmp / "a"}).code == kOk);
  auto m = read_manifest(tmp / "a/manifest.json");
  CHECK(flag_value(m, "kappa") == "1.5");
  CHECK(flag_value(m, "n") == "16");
  REQUIRE(sle_lab({"trace", "--config", tmp / "run.cfg", "--kappa", "0.5", "--out", tmp / "b"}).code == kOk);
  m = read_manifest(tmp / "b/manifest.json");
  CHECK(flag_value(m, "kappa") == "0.5");
  CHECK(flag_value(m, "fine") == "1024");
  write_file_atomic(tmp / "bad.cfg", "kappa 1.5\n");
  CHECK(sle_lab({"trace", "--config", tmp / "bad.cfg", "--out", tmp / "c"}).code == kUsage);
}

TEST_CASE("kappa sequences") {
  CHECK(parse_kappa_seq("2.5,2.25", 2.0) == std::vector<double>{2.5, 2.25});
  CHECK(parse_kappa_seq("pow2:1..2", 2.0) == std::vector<double>{2.5, 2.25});
  CHECK(parse_kappa_seq("pow2-:1..2", 2.0) == std::vector<double>{1.5, 1.75});
  CHECK_THROWS_AS(parse_kappa_seq("pow2:3..1", 2.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_kappa_seq("a,b", 2.0), std::invalid_argument);
}

}  // TEST_SUITE
