#pragma once

#include <stdexcept>
#include <string>

namespace dpgcl {

// Bad key, bad value, or inconsistent settings in a run config. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Noise calibration cannot meet the target within the search bracket. CLI exit code 3.
class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

// An empirical sensitivity measurement exceeded its theoretical bound. CLI exit code 4.
class SensitivityViolation : public std::runtime_error {
 public:
  explicit SensitivityViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dpgcl
