// Run manifest written next to every output batch: the resolved config echo,
// tool version, master seed, and an FNV-1a checksum per output file, so a
// run can be replayed and verified byte for byte.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddso {

inline constexpr const char* kToolVersion = "1.0.0";

std::uint64_t fnv1a64(const std::string& bytes);

struct RunManifest {
  std::string command;
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::pair<std::string, std::uint64_t>> output_checksums;

  std::string to_json() const;
};

// Writes to a temporary file in the same directory, then renames into place.
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace ddso
