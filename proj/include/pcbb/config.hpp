#pragma once

// Flat key-value configuration text with [section] headers, '#' comments and
// 'key = value' entries. Parsing records line numbers so validation errors
// can point at the offending entry.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcbb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigMap {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;  // 0 when set programmatically
  };

  static ConfigMap parse(std::istream& in, const std::string& origin = "<config>");
  static ConfigMap parse_file(const std::filesystem::path& path);

  void set(const std::string& section, const std::string& key, const std::string& value);
  bool contains(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;

  // Typed getters; throw ConfigError mentioning origin and line on bad values.
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& what) const;

  std::vector<Entry> entries_;  // insertion order preserved for round-trips
  std::string origin_ = "<config>";
};

}  // namespace pcbb
