#include "msfct/manifest.hpp"

#include <cstdio>

#include "json.hpp"
#include "msfct/io.hpp"

namespace msfct {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_config_bytes(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["tool_version"] = m.tool_version;
  j["subcommand"] = m.subcommand;
  j["config_path"] = m.config_path;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["status"] = m.status;
  nlohmann::json eff = nlohmann::json::object();
  for (const auto& [k, v] : m.effective) eff[k] = v;
  j["effective"] = eff;
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& [name, ms] : m.timings_ms)
    timings.push_back({{"stage", name}, {"ms", ms}});
  j["timings"] = timings;
  j["outputs"] = m.outputs;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace msfct
