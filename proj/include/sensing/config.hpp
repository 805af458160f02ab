#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sensing/errors.hpp"

namespace sensing {

// Configuration error tied to a line of the source (0 when not line-specific).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Flat `key = value` text with dotted section names. '#' starts a comment.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "config");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line(const std::string& key) const;
  const std::string& source() const { return source_; }

  std::string str(const std::string& key, const std::string& fallback) const;
  std::string str(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  double num(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  // Comma-separated numbers; an empty value is an empty list.
  std::vector<double> list(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  // Rejects keys outside `allowed`, naming the offending line.
  void restrict_to(const std::set<std::string>& allowed) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace sensing
