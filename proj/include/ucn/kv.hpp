#pragma once

// Flat `key = value` text files, used for the experiment config and for
// database .meta sidecars. Grammar: one `key = value` pair per line, `#`
// starts a comment line, blank lines ignored. Keys and values are trimmed.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ucn {

class KvFile {
 public:
  KvFile() = default;

  static KvFile parse_text(const std::string& text);
  static KvFile load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_text() const;

  bool has(const std::string& key) const;
  // Keys present in the file but never read through a getter.
  std::vector<std::string> unread_keys() const;

  const std::string& get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  void set_string(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, std::int64_t value);
  void set_uint(const std::string& key, std::uint64_t value);
  void set_bool(const std::string& key, bool value);

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
};

// Full-precision decimal text for a double; round-trips bit-exactly.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);

}  // namespace ucn
