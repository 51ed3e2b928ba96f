#include "ddso/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ddso {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["master_seed"] = master_seed;
  nlohmann::ordered_json cfg;
  for (const auto& [key, value] : config_echo) cfg[key] = value;
  j["config"] = cfg;
  nlohmann::ordered_json outs;
  for (const auto& [file, checksum] : output_checksums) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(checksum));
    outs[file] = buf;
  }
  j["outputs"] = outs;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "'");
    out << manifest.to_json();
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename manifest into place at '" + path + "'");
  }
}

}  // namespace ddso
