#include "sensing/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sensing {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool parse_double(const std::string& s, double& v) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  return r.ec == std::errc() && r.ptr == end;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : Error(ErrorKind::Config, line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  c.source_ = source;
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(source, n, "expected `key = value`");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError(source, n, "empty key");
    if (c.entries_.count(key)) throw ConfigError(source, n, "duplicate key `" + key + "`");
    c.entries_[key] = {trim(text.substr(eq + 1)), n};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, 0, "cannot open config file");
  return parse(f, path);
}

int Config::line(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void Config::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(source_, line(key), what);
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

std::string Config::str(const std::string& key) const {
  if (!has(key)) fail(key, "missing required key `" + key + "`");
  return entries_.at(key).value;
}

double Config::num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

double Config::num(const std::string& key) const {
  const std::string s = str(key);
  double v;
  if (!parse_double(s, v)) fail(key, "`" + key + "` must be a number, got `" + s + "`");
  return v;
}

int Config::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const std::string s = str(key);
  int v;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "`" + key + "` must be an integer, got `" + s + "`");
  return v;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string s = str(key);
  std::uint64_t v;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(key, "`" + key + "` must be an unsigned integer, got `" + s + "`");
  return v;
}

bool Config::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, "`" + key + "` must be true or false, got `" + s + "`");
}

std::vector<std::string> Config::words(const std::string& key) const {
  std::vector<std::string> out;
  if (!has(key)) return out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : words(key)) {
    double v;
    if (!parse_double(w, v)) fail(key, "`" + key + "` must be a list of numbers, got `" + w + "`");
    out.push_back(v);
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it == entries_.end())
    entries_[key] = {value, 0};
  else
    it->second.value = value;
}

void Config::restrict_to(const std::set<std::string>& allowed) const {
  for (const auto& [key, e] : entries_)
    if (!allowed.count(key)) throw ConfigError(source_, e.line, "unknown key `" + key + "`");
}

}  // namespace sensing
