#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace msfct {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& bytes);

// Provenance record written (atomically) at the end of every CLI run: the
// config file hash, the effective parameter values after flag overrides, the
// per-stage timings, and the produced files.
struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string subcommand;
  std::string config_path;
  std::string config_hash;  // "fnv1a64:<16 hex digits>" of the config bytes
  std::uint64_t seed{0};
  int threads{0};
  std::string status{"ok"};
  std::vector<std::pair<std::string, std::string>> effective;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<std::string> outputs;
};

std::string hash_config_bytes(const std::string& bytes);
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace msfct
