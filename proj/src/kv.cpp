#include "ucn/kv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ucn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw std::runtime_error(context + ": not a number: '" + s + "'");
  return v;
}

KvFile KvFile::parse_text(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    if (kv.values_.count(key))
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": duplicate key '" + key + "'");
    kv.values_[key] = val;
  }
  return kv;
}

KvFile KvFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

void KvFile::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << to_text();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string KvFile::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

bool KvFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::vector<std::string> KvFile::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

const std::string& KvFile::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::runtime_error("missing config key: " + key);
  read_[key] = true;
  return it->second;
}

double KvFile::get_double(const std::string& key) const {
  return parse_double(get_string(key), "config key '" + key + "'");
}

std::int64_t KvFile::get_int(const std::string& key) const {
  const std::string& s = get_string(key);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw std::runtime_error("config key '" + key + "': not an integer: '" +
                             s + "'");
  return v;
}

std::uint64_t KvFile::get_uint(const std::string& key) const {
  const std::string& s = get_string(key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || s[0] == '-')
    throw std::runtime_error("config key '" + key +
                             "': not an unsigned integer: '" + s + "'");
  return v;
}

bool KvFile::get_bool(const std::string& key) const {
  const std::string& s = get_string(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::runtime_error("config key '" + key + "': expected true/false: '" +
                           s + "'");
}

std::vector<std::string> KvFile::get_string_list(const std::string& key) const {
  const std::string& s = get_string(key);
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<double> KvFile::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_string_list(key))
    out.push_back(parse_double(item, "config key '" + key + "'"));
  return out;
}

void KvFile::set_string(const std::string& key, const std::string& value) {
  values_[key] = value;
}
void KvFile::set_double(const std::string& key, double value) {
  values_[key] = format_double(value);
}
void KvFile::set_int(const std::string& key, std::int64_t value) {
  values_[key] = std::to_string(value);
}
void KvFile::set_uint(const std::string& key, std::uint64_t value) {
  values_[key] = std::to_string(value);
}
void KvFile::set_bool(const std::string& key, bool value) {
  values_[key] = value ? "true" : "false";
}

}  // namespace ucn
