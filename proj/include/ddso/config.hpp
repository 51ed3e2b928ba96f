// INI-style experiment configuration: [section] headers with `key = value`
// lines, `#`/`;` comments. Unknown keys, duplicate keys, type errors and
// constraint violations are all collected and reported together with their
// line numbers.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddso/harness.hpp"

namespace ddso {

struct RunConfig {
  ExperimentConfig experiment;
  std::vector<double> gamma_list;  // for the sweep subcommand
  int n_large = 4000;              // for the limits subcommand
  int m_samples = 100000;
  bool svg = true;
  bool svg_log_y = false;

  // Echo of the resolved key/value pairs (defaults filled), for the manifest.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

RunConfig parse_config(std::istream& in, const std::string& source_name = "<stream>");
RunConfig parse_config_file(const std::string& path);

}  // namespace ddso
