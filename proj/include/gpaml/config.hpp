#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gpaml {

// Flat dotted-key configuration: one `key = value` per line, `#` comments.
// Keys are validated against a fixed registry at load time; an unknown key
// is an error, never a warning. Every value a command reads is recorded with
// its final (possibly defaulted) form, so the run manifest doubles as a
// re-runnable config.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config from_string(const std::string& text,
                            const std::string& origin = "<string>");

  // CLI overrides (e.g. --seed); the key must still be in the registry.
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;
  std::uint64_t get_seed() const;  // `seed`, default 0

  std::string require_string(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;

  // Everything read so far, with final values; ordered by key.
  const std::map<std::string, std::string>& resolved() const {
    return resolved_;
  }

 private:
  std::string raw(const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace gpaml
