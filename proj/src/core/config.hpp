#ifndef MFSIM_CORE_CONFIG_HPP
#define MFSIM_CORE_CONFIG_HPP

#include <map>
#include <optional>
#include <string>

#include "core/types.hpp"

namespace mfsim {

// Hierarchical key-value text config: one `section.key = value` per line,
// '#' starts a comment. Later assignments win.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Required variants throw ConfigError naming the key.
  std::string require_string(const std::string& key) const;
  double require_double(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  double parse_double(const std::string& key, const std::string& v) const;
  std::map<std::string, std::string> entries_;
};

}  // namespace mfsim

#endif
