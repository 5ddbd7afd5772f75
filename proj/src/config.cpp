#include "gpaml/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gpaml/error.hpp"

namespace gpaml {

namespace {

constexpr std::array kKnownKeys = {
    "seed",
    "metric",
    "p0.a",
    "dataset.path",
    "dataset.format",
    "dataset.counts.a",
    "dataset.counts.b",
    "dataset.synthetic.n_per_category",
    "dataset.synthetic.separation",
    "learner.kind",
    "learner.noise_sd",
    "learner.forest.trees",
    "learner.forest.max_depth",
    "learner.forest.min_leaf",
    "learner.forest.mtry",
    "experiment.b",
    "experiment.z",
    "experiment.q",
    "experiment.record_membership",
    "experiment.random_test_proportion",
    "state.n_a",
    "state.n_b",
    "acquire.n",
    "campaign.policy",
    "campaign.n_start",
    "campaign.n_stop",
    "campaign.step",
    "campaign.holdout",
    "campaign.start_balance",
    "suitability.reps",
    "suitability.major",
    "suitability.minor",
    "suitability.holdout",
    "robustness.b_total",
    "robustness.sizes",
    "robustness.reps",
    "robustness.good",
    "gp.starts",
    "gp.max_evals",
};

bool known_key(const std::string& key) {
  return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) !=
         kKnownKeys.end();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path.string());
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (!known_key(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
    if (cfg.values_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const std::string v = has(key) ? raw(key) : fallback;
  resolved_[key] = v;
  return v;
}

std::int64_t Config::get_int(const std::string& key,
                             std::int64_t fallback) const {
  if (!has(key)) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  return require_int(key);
}

std::int64_t Config::require_int(const std::string& key) const {
  const std::string v = raw(key);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  resolved_[key] = v;
  return out;
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) {
    std::ostringstream os;
    os << fallback;
    resolved_[key] = os.str();
    return fallback;
  }
  const std::string v = raw(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
  resolved_[key] = v;
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) {
    resolved_[key] = fallback ? "true" : "false";
    return fallback;
  }
  const std::string v = raw(key);
  if (v == "true" || v == "1") {
    resolved_[key] = v;
    return true;
  }
  if (v == "false" || v == "0") {
    resolved_[key] = v;
    return false;
  }
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
  if (!has(key)) {
    std::string joined;
    for (std::size_t i = 0; i < fallback.size(); ++i) {
      if (i) joined += ",";
      joined += std::to_string(fallback[i]);
    }
    resolved_[key] = joined;
    return fallback;
  }
  const std::string v = raw(key);
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const std::string item =
        trim(v.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start));
    if (item.empty()) {
      throw ConfigError("key '" + key + "': empty entry in list '" + v + "'");
    }
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("key '" + key + "': expected integers, got '" + item +
                        "'");
    }
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  resolved_[key] = v;
  return out;
}

std::uint64_t Config::get_seed() const {
  if (!has("seed")) {
    resolved_["seed"] = "0";
    return 0;
  }
  const std::string v = raw("seed");
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key 'seed': expected an unsigned integer, got '" + v +
                      "'");
  }
  resolved_["seed"] = v;
  return out;
}

std::string Config::require_string(const std::string& key) const {
  const std::string v = raw(key);
  resolved_[key] = v;
  return v;
}

}  // namespace gpaml
