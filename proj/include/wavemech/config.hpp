#pragma once

#include "wavemech/core.hpp"
#include "wavemech/vec.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace wavemech {

/// Flat INI text: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Keys are addressed as "section.key". Every entry remembers its
/// line so validation errors can point at it.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma- or space-separated numbers; a single value is broadcast to `n`.
  std::vector<double> get_doubles(const std::string& key, std::size_t n) const;
  std::vector<double> get_doubles(const std::string& key, std::size_t n, const std::vector<double>& fallback) const;
  Vec3 get_vec(const std::string& key, int dims, const Vec3& fallback = {}) const;
  std::vector<std::string> get_list(const std::string& key) const;

  /// configuration error naming the source and line of `key`.
  [[noreturn]] void fail_at(const std::string& key, const std::string& message) const;

  /// Throws for any key never read through a getter (typos surface early).
  void reject_unused() const;

  /// Canonical text, sections and keys sorted; parse(serialize()) == *this.
  std::string serialize() const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  friend bool operator==(const Config& a, const Config& b);

 private:
  const Entry& entry(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  std::string source_;
  mutable std::set<std::string> used_;
};

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace wavemech
