#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

namespace crane {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat `key = value` configuration with `#` comments and dotted namespaces.
// The set of keys is closed: every key must appear in the built-in registry
// (which also supplies the defaults), so unknown or misspelled keys are
// rejected by name instead of being silently ignored.
class Config {
 public:
  // All registered keys at their default values.
  static Config defaults();

  // Defaults overridden by the assignments in `path`.
  static Config load(const std::filesystem::path& path);

  // Parses `text` on top of the current values. `origin` is used in errors.
  void parse(const std::string& text, const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  // Canonical text form: sorted `key = value` lines. Parsing it back yields
  // an identical Config, and its FNV-1a hash identifies the parameter set.
  std::string serialize() const;
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace crane
