#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace slelab::cli {

std::string sha256_hex(std::string_view data);
std::string utc_timestamp();
std::string tool_version();

struct OutputDigest {
  std::string file;  // relative to the output directory
  std::string sha256;
};

/// Everything needed to re-run a command and check its outputs.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> flags;  // in declaration order
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::string tool_version;
  std::vector<OutputDigest> outputs;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestName = "manifest.json";

/// Collects the files of one run. Every write is atomic and digested; finish()
/// writes the single manifest of the directory.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, RunManifest manifest);

  void write(const std::string& name, std::string_view content);
  const RunManifest& finish();
  const std::filesystem::path& path() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  RunManifest manifest_;
};

RunManifest read_manifest(const std::filesystem::path& file);

}  // namespace slelab::cli
