#include "manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <stdexcept>

#include "slelab/io.hpp"

#ifndef SLELAB_VERSION
#define SLELAB_VERSION "0.0.0"
#endif

namespace slelab::cli {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tool_version() { return SLELAB_VERSION; }

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  auto& f = j["flags"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : flags) f[k] = v;
  j["seed"] = seed;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["tool_version"] = tool_version;
  auto& outs = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : outputs) outs.push_back({{"file", o.file}, {"sha256", o.sha256}});
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  // nlohmann::json sorts object keys; flag order does not matter for replay.
  for (const auto& [k, v] : j.at("flags").items()) m.flags.emplace_back(k, v.get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.tool_version = j.value("tool_version", "");
  for (const auto& o : j.at("outputs")) {
    m.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>()});
  }
  return m;
}

OutputDir::OutputDir(std::filesystem::path dir, RunManifest manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {
  std::filesystem::create_directories(dir_);
  manifest_.started_at = utc_timestamp();
  manifest_.tool_version = tool_version();
}

void OutputDir::write(const std::string& name, std::string_view content) {
  write_file_atomic(dir_ / name, content);
  manifest_.outputs.push_back({name, sha256_hex(content)});
}

const RunManifest& OutputDir::finish() {
  manifest_.finished_at = utc_timestamp();
  write_file_atomic(dir_ / kManifestName, manifest_.to_json().dump(2) + "\n");
  return manifest_;
}

RunManifest read_manifest(const std::filesystem::path& file) {
  return RunManifest::from_json(nlohmann::json::parse(read_file(file)));
}

}  // namespace slelab::cli
