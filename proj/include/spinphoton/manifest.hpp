#pragma once

// Run manifest: every CLI invocation records its command, inputs, seed, and
// a SHA-256 checksum per emitted artifact, so a run can be reproduced and
// verified byte for byte.

#include <map>
#include <string>
#include <vector>

namespace spinphoton {

inline constexpr const char* tool_version = "0.1.0";

std::string sha256_hex(const std::string& data);

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  std::map<std::string, long> sample_counts;
  std::string output_dir;
  std::string version = tool_version;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name, sha256

  // writes content to output_dir/name and records its checksum
  void write_artifact(const std::string& name, const std::string& content);
  std::string to_json() const;
  void save() const;  // output_dir/manifest.json
};

}  // namespace spinphoton
