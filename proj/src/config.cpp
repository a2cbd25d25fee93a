#include "dpgcl/config.hpp"

#include <fstream>
#include <sstream>

#include "dpgcl/errors.hpp"

namespace dpgcl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    if (kv.count(key)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key: " + key);
    }
    kv[key] = value;
  }
  return from_map(std::move(kv));
}

RunConfig RunConfig::from_map(std::map<std::string, std::string> kv) {
  RunConfig cfg;
  cfg.kv_ = std::move(kv);
  return cfg;
}

void RunConfig::restrict_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, _] : kv_) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config key: " + key);
    }
  }
}

bool RunConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key: " + key);
  return it->second;
}

std::string RunConfig::get_string_or(const std::string& key,
                                     const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const std::string raw = get_string(key);
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for key " + key + ": " + raw);
  }
}

std::int64_t RunConfig::get_int_or(const std::string& key,
                                   std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double RunConfig::get_real(const std::string& key) const {
  const std::string raw = get_string(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad real for key " + key + ": " + raw);
  }
}

double RunConfig::get_real_or(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

std::vector<std::string> RunConfig::get_string_list(
    const std::string& key) const {
  const std::string raw = get_string(key);
  std::vector<std::string> parts;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  if (parts.empty()) throw ConfigError("empty list for key " + key);
  return parts;
}

std::vector<std::int64_t> RunConfig::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& item : get_string_list(key)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad integer list entry for key " + key + ": " + item);
    }
  }
  return out;
}

std::vector<double> RunConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_string_list(key)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad real list entry for key " + key + ": " + item);
    }
  }
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

}  // namespace dpgcl
