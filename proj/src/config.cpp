#include "ddso/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ddso {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!current.empty()) {
        items.push_back(current);
        current.clear();
      }
    } else {
      current += c;
    }
  }
  if (!current.empty()) items.push_back(current);
  return items;
}

struct Collector {
  std::vector<std::string> errors;
  void add(int line, const std::string& msg) {
    errors.push_back("line " + std::to_string(line) + ": " + msg);
  }
};

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, long long& out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

const std::set<std::string> kKnownKeys = {
    "problem", "setting", "gamma", "gamma_list", "p", "h", "b", "capacity", "alpha",
    "theta0", "methods", "n_list", "replications", "seed", "c1", "workers",
    "ieo_literal_grid", "n_large", "m_samples", "svg", "svg_log_y"};

const std::set<std::string> kKnownSections = {"", "experiment", "output", "limits"};

}  // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  const auto join_d = [](const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
  };
  const auto join_i = [](const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
  };
  std::string methods;
  for (Method m : experiment.effective_methods()) {
    if (!methods.empty()) methods += ",";
    methods += to_string(m);
  }
  std::vector<std::pair<std::string, std::string>> out = {
      {"problem", experiment.problem},
      {"setting", experiment.setting},
      {"p", std::to_string(experiment.p)},
      {"h", std::to_string(experiment.h)},
      {"b", std::to_string(experiment.b)},
      {"capacity", std::to_string(experiment.capacity)},
      {"alpha", std::to_string(experiment.alpha)},
      {"theta0", std::to_string(experiment.theta0)},
      {"methods", methods},
      {"n_list", join_i(experiment.n_list)},
      {"replications", std::to_string(experiment.replications)},
      {"seed", std::to_string(experiment.master_seed)},
      {"c1", join_d(experiment.c1_thresholds)},
      {"workers", std::to_string(experiment.workers)},
      {"ieo_literal_grid", experiment.ieo_literal_grid ? "true" : "false"},
      {"n_large", std::to_string(n_large)},
      {"m_samples", std::to_string(m_samples)},
      {"svg", svg ? "true" : "false"},
      {"svg_log_y", svg_log_y ? "true" : "false"},
  };
  if (experiment.setting == "gamma") out.push_back({"gamma", std::to_string(experiment.gamma)});
  if (!gamma_list.empty()) out.push_back({"gamma_list", join_d(gamma_list)});
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& source_name) {
  RunConfig cfg;
  Collector err;
  std::map<std::string, int> seen;  // key -> first line
  std::string line;
  int line_no = 0;
  std::string section;

  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        err.add(line_no, "malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!kKnownSections.count(section)) {
        err.add(line_no, "unknown section '" + section + "'");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err.add(line_no, "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!kKnownKeys.count(key)) {
      err.add(line_no, "unknown key '" + key + "'");
      continue;
    }
    if (seen.count(key)) {
      err.add(line_no, "duplicate key '" + key + "' (first set on line " +
                           std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = line_no;

    double d = 0.0;
    long long i = 0;
    bool flag = false;
    if (key == "problem") {
      cfg.experiment.problem = value;
    } else if (key == "setting") {
      cfg.experiment.setting = value;
    } else if (key == "gamma") {
      if (!parse_double(value, d)) {
        err.add(line_no, "gamma: not a number: '" + value + "'");
      } else if (d < 0.0 || d > 1.0) {
        err.add(line_no, "gamma must lie in [0,1], got " + value);
      } else {
        cfg.experiment.gamma = d;
      }
    } else if (key == "gamma_list") {
      for (const std::string& item : split_list(value)) {
        if (!parse_double(item, d)) {
          err.add(line_no, "gamma_list: not a number: '" + item + "'");
        } else if (d < 0.0 || d > 1.0) {
          err.add(line_no, "gamma_list entries must lie in [0,1], got " + item);
        } else {
          cfg.gamma_list.push_back(d);
        }
      }
    } else if (key == "p") {
      if (!parse_int(value, i) || i < 1) {
        err.add(line_no, "p must be a positive integer, got '" + value + "'");
      } else {
        cfg.experiment.p = static_cast<int>(i);
      }
    } else if (key == "h" || key == "b" || key == "capacity" || key == "alpha" ||
               key == "theta0") {
      if (!parse_double(value, d)) {
        err.add(line_no, key + ": not a number: '" + value + "'");
      } else if ((key != "theta0") && !(d > 0.0)) {
        err.add(line_no, key + " must be positive, got " + value);
      } else if (key == "h") {
        cfg.experiment.h = d;
      } else if (key == "b") {
        cfg.experiment.b = d;
      } else if (key == "capacity") {
        cfg.experiment.capacity = d;
      } else if (key == "alpha") {
        cfg.experiment.alpha = d;
      } else {
        cfg.experiment.theta0 = d;
      }
    } else if (key == "methods") {
      for (const std::string& item : split_list(value)) {
        if (item == "SAA" || item == "saa") {
          cfg.experiment.methods.push_back(Method::SAA);
        } else if (item == "ETO" || item == "eto") {
          cfg.experiment.methods.push_back(Method::ETO);
        } else if (item == "IEO" || item == "ieo") {
          cfg.experiment.methods.push_back(Method::IEO);
        } else {
          err.add(line_no, "methods: unknown method '" + item + "'");
        }
      }
    } else if (key == "n_list") {
      for (const std::string& item : split_list(value)) {
        if (!parse_int(item, i) || i < 1) {
          err.add(line_no, "n_list: entries must be positive integers, got '" + item + "'");
        } else {
          cfg.experiment.n_list.push_back(static_cast<int>(i));
        }
      }
    } else if (key == "replications") {
      if (!parse_int(value, i) || i < 1) {
        err.add(line_no, "replications must be a positive integer, got '" + value + "'");
      } else {
        cfg.experiment.replications = static_cast<int>(i);
      }
    } else if (key == "seed") {
      if (!parse_int(value, i) || i < 0) {
        err.add(line_no, "seed must be a nonnegative integer, got '" + value + "'");
      } else {
        cfg.experiment.master_seed = static_cast<std::uint64_t>(i);
      }
    } else if (key == "c1") {
      cfg.experiment.c1_thresholds.clear();
      for (const std::string& item : split_list(value)) {
        if (!parse_double(item, d)) {
          err.add(line_no, "c1: not a number: '" + item + "'");
        } else {
          cfg.experiment.c1_thresholds.push_back(d);
        }
      }
    } else if (key == "workers") {
      if (!parse_int(value, i) || i < 1) {
        err.add(line_no, "workers must be a positive integer, got '" + value + "'");
      } else {
        cfg.experiment.workers = static_cast<int>(i);
      }
    } else if (key == "ieo_literal_grid") {
      if (!parse_bool(value, flag)) {
        err.add(line_no, "ieo_literal_grid: expected a boolean, got '" + value + "'");
      } else {
        cfg.experiment.ieo_literal_grid = flag;
      }
    } else if (key == "n_large") {
      if (!parse_int(value, i) || i < 1) {
        err.add(line_no, "n_large must be a positive integer, got '" + value + "'");
      } else {
        cfg.n_large = static_cast<int>(i);
      }
    } else if (key == "m_samples") {
      if (!parse_int(value, i) || i < 1) {
        err.add(line_no, "m_samples must be a positive integer, got '" + value + "'");
      } else {
        cfg.m_samples = static_cast<int>(i);
      }
    } else if (key == "svg") {
      if (!parse_bool(value, flag)) {
        err.add(line_no, "svg: expected a boolean, got '" + value + "'");
      } else {
        cfg.svg = flag;
      }
    } else if (key == "svg_log_y") {
      if (!parse_bool(value, flag)) {
        err.add(line_no, "svg_log_y: expected a boolean, got '" + value + "'");
      } else {
        cfg.svg_log_y = flag;
      }
    }
  }

  // A bare gamma key selects the interpolated-misspecification setting
  // unless the setting was given explicitly.
  if (seen.count("gamma") && !seen.count("setting")) cfg.experiment.setting = "gamma";

  if (cfg.experiment.n_list.empty()) {
    err.errors.push_back("missing required key 'n_list'");
  } else {
    // Run the structural checks even when parse errors exist so one pass
    // reports every offending line and violated constraint together.
    try {
      cfg.experiment.validate();
    } catch (const std::invalid_argument& e) {
      err.errors.push_back(e.what());
    }
  }
  if (!err.errors.empty()) {
    std::string msg = source_name + ":";
    for (const std::string& e : err.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace ddso
