#include "pcbb/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pcbb {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& in, const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header '" + t + "'");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + t + "'");
    }
    Entry e;
    e.section = section;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.entries_.push_back(std::move(e));
  }
  return cfg;
}

ConfigMap ConfigMap::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse(in, path.string());
}

void ConfigMap::set(const std::string& section, const std::string& key,
                    const std::string& value) {
  for (auto& e : entries_) {
    if (e.section == section && e.key == key) {
      e.value = value;
      return;
    }
  }
  entries_.push_back({section, key, value, 0});
}

const ConfigMap::Entry* ConfigMap::find(const std::string& section,
                                        const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section == section && e.key == key) return &e;
  }
  return nullptr;
}

bool ConfigMap::contains(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::optional<std::string> ConfigMap::get(const std::string& section,
                                          const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

void ConfigMap::fail(const Entry& e, const std::string& what) const {
  throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": [" + e.section + "] " +
                    e.key + ": " + what);
}

double ConfigMap::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(e->value, &pos);
    if (pos != e->value.size()) fail(*e, "trailing characters in number '" + e->value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(*e, "not a number: '" + e->value + "'");
  }
}

long ConfigMap::get_long(const std::string& section, const std::string& key,
                         long fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  long v = 0;
  const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (res.ec != std::errc{} || res.ptr != e->value.data() + e->value.size()) {
    fail(*e, "not an integer: '" + e->value + "'");
  }
  return v;
}

std::uint64_t ConfigMap::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (res.ec != std::errc{} || res.ptr != e->value.data() + e->value.size()) {
    fail(*e, "not an unsigned integer: '" + e->value + "'");
  }
  return v;
}

std::string ConfigMap::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

void ConfigMap::write(std::ostream& out) const {
  std::string current;
  bool first = true;
  for (const auto& e : entries_) {
    if (e.section != current || first) {
      if (!first) out << '\n';
      out << '[' << e.section << "]\n";
      current = e.section;
      first = false;
    }
    out << e.key << " = " << e.value << '\n';
  }
}

void ConfigMap::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path.string());
  write(out);
}

}  // namespace pcbb
