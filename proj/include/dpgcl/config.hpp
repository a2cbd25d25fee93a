#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dpgcl {

// Flat `key = value` config with `#` comments. Commands declare their key
// set up front; anything unknown is rejected before any work begins.
class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig from_map(std::map<std::string, std::string> kv);

  void restrict_keys(const std::set<std::string>& allowed) const;

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double fallback) const;

  std::vector<std::int64_t> get_int_list(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace dpgcl
