#pragma once

#include <omnijump/config.hpp>
#include <omnijump/grf_profile.hpp>
#include <omnijump/robot_model.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jumpopt {

namespace fs = std::filesystem;

// sysexits-style codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailed = 2;
inline constexpr int kExitUnreachable = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataError = 65;
inline constexpr int kExitNoInput = 66;
inline constexpr int kExitSoftware = 70;
inline constexpr int kExitCantCreate = 73;

inline constexpr const char* kRobotEnv = "OMNIJUMP_ROBOT_CONFIG";

/// Carries an exit status up to main().
class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] int code() const { return code_; }

 private:
  int code_;
};

/// Preset name or config path; empty falls back to $OMNIJUMP_ROBOT_CONFIG, then
/// to the platform default for `mode`.
omnijump::RobotParams resolve_robot(const std::string& spec, omnijump::JumpMode mode);

std::string read_text(const fs::path& path);

/// Creates `out` and writes `name` inside it; `name` must be a plain file name.
void write_artifact(const fs::path& out, const std::string& name, const std::string& text);

/// Key = value manifest; every value is printed verbatim, in insertion order.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  [[nodiscard]] std::string text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string hex64(std::uint64_t v);
std::string number(double v);  // %.17g

/// Canonical "name value..." lines of the parsed options of `app`, for digests.
std::string option_digest_text(const CLI::App& app);

}  // namespace jumpopt
