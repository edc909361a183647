#pragma once

#include "omnijump/robot_model.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnijump {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// Plain `key = v1 v2 ...` records. `#` starts a comment. Keys keep file order
/// for digesting; a repeated key overrides the earlier value.
struct KeyValueConfig {
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, int> lines;

  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  [[nodiscard]] bool has(const std::string& key) const { return values.count(key) != 0; }
  [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] std::string text(const std::string& key) const;

  /// Canonical `key = values` rendering, one per line in key order.
  [[nodiscard]] std::string canonical() const;
};

/// Builds robot parameters from a config. `base = <preset>` selects the starting
/// preset (default mini_cheetah); any RobotParams field present overrides it.
/// joint_limits lists (q_min, q_max) per joint; hip_offsets lists x y z per leg.
RobotParams robot_from_config(const KeyValueConfig& cfg);

/// Inverse of robot_from_config: a config text that reproduces `p` exactly.
std::string robot_to_config(const RobotParams& p);

}  // namespace omnijump
