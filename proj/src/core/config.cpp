#include "core/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mfsim {

namespace {
std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}
}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.set(key, val);
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = value; }

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<std::string> Config::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto v = raw(key);
  return v ? *v : fallback;
}

double Config::parse_double(const std::string& key, const std::string& v) const {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  return d;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = raw(key);
  return v ? parse_double(key, *v) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  double d = parse_double(key, *v);
  long l = static_cast<long>(d);
  if (static_cast<double>(l) != d)
    throw ConfigError("config key '" + key + "': expected integer, got '" + *v + "'");
  return l;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + *v + "'");
}

std::string Config::require_string(const std::string& key) const {
  auto v = raw(key);
  if (!v) throw ConfigError("missing required config key '" + key + "'");
  return *v;
}

double Config::require_double(const std::string& key) const {
  auto v = raw(key);
  if (!v) throw ConfigError("missing required config key '" + key + "'");
  return parse_double(key, *v);
}

}  // namespace mfsim
