#include "wavemech/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace wavemech {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_number(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  auto bad = [&](const std::string& msg) { fail(ErrorKind::configuration, source + ":" + std::to_string(line) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_name(section)) bad("invalid section name '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) bad("expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!valid_name(key)) bad("invalid key '" + key + "'");
    if (section.empty()) bad("key '" + key + "' appears before any [section]");
    const std::string full = section + "." + key;
    if (c.entries_.count(full)) bad("duplicate key '" + full + "' (first set on line " + std::to_string(c.entries_[full].line) + ")");
    c.entries_[full] = Entry{value, line};
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::configuration, "cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_[key] = Entry{value, 0};
  } else {
    it->second.value = value;
  }
}

const Config::Entry& Config::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) fail(ErrorKind::configuration, source_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

void Config::fail_at(const std::string& key, const std::string& message) const {
  auto it = entries_.find(key);
  const std::string where = it == entries_.end() || it->second.line == 0
                                ? source_
                                : source_ + ":" + std::to_string(it->second.line);
  fail(ErrorKind::configuration, where + ": " + key + ": " + message);
}

std::string Config::get_string(const std::string& key) const { return entry(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  double v = 0.0;
  if (!parse_number(entry(key).value, v)) fail_at(key, "expected a number, got '" + entry(key).value + "'");
  return v;
}

double Config::get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

long Config::get_int(const std::string& key) const {
  const std::string& s = entry(key).value;
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail_at(key, "expected an integer, got '" + s + "'");
  return v;
}

long Config::get_int(const std::string& key, long fallback) const { return has(key) ? get_int(key) : fallback; }

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = entry(key).value;
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  fail_at(key, "expected a boolean, got '" + s + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, std::size_t n) const {
  const auto parts = split_list(entry(key).value);
  std::vector<double> out;
  for (const auto& p : parts) {
    double v = 0.0;
    if (!parse_number(p, v)) fail_at(key, "expected numbers, got '" + p + "'");
    out.push_back(v);
  }
  if (out.size() == 1 && n > 1) out.assign(n, out.front());
  if (out.size() != n) fail_at(key, "expected " + std::to_string(n) + " values, got " + std::to_string(out.size()));
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key, std::size_t n, const std::vector<double>& fallback) const {
  return has(key) ? get_doubles(key, n) : fallback;
}

Vec3 Config::get_vec(const std::string& key, int dims, const Vec3& fallback) const {
  if (!has(key)) return fallback;
  const auto v = get_doubles(key, static_cast<std::size_t>(dims));
  Vec3 out;
  for (int a = 0; a < dims; ++a) out[a] = v[static_cast<std::size_t>(a)];
  return out;
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  return has(key) ? split_list(entry(key).value) : std::vector<std::string>{};
}

void Config::reject_unused() const {
  for (const auto& [k, e] : entries_) {
    if (!used_.count(k)) fail(ErrorKind::configuration, source_ + ":" + std::to_string(e.line) + ": unknown key '" + k + "'");
  }
}

std::string Config::serialize() const {
  std::ostringstream os;
  std::string section;
  for (const auto& [k, e] : entries_) {
    const auto dot = k.find('.');
    const std::string s = k.substr(0, dot);
    if (s != section) {
      if (!section.empty()) os << '\n';
      os << '[' << s << "]\n";
      section = s;
    }
    os << k.substr(dot + 1) << " = " << e.value << '\n';
  }
  return os.str();
}

bool operator==(const Config& a, const Config& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (const auto& [k, e] : a.entries_) {
    auto it = b.entries_.find(k);
    if (it == b.entries_.end() || it->second.value != e.value) return false;
  }
  return true;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace wavemech
