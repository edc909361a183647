#pragma once

#include "omnijump/otp_de.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace omnijump {

/// Two axis-aligned boxes (above, below), each as centre xyz then half-extents xyz.
using ObstacleRecord = std::array<double, 12>;

struct PreMotionEntry {
  std::int64_t id = 0;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  JumpMode mode = JumpMode::Omni;
  std::optional<ObstacleRecord> obstacle;
  OptVector s_pre;
  double fitness = 0.0;
  int generations = 0;
};

class LibraryError : public std::runtime_error {
 public:
  LibraryError(const std::string& file, std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class PreMotionLibrary {
 public:
  explicit PreMotionLibrary(double cell = 0.05);

  /// Throws std::invalid_argument for a duplicate (within 1e-6 m, same mode) or a
  /// repeated id, or an entry that was not feasible (fitness >= 1e4).
  void add(PreMotionEntry entry);

  /// Nearest entry of `mode` strictly closer than r; ties go to the lowest id.
  [[nodiscard]] const PreMotionEntry* lookup(const Eigen::Vector3d& p, JumpMode mode,
                                             double r = 0.05) const;
  /// Linear-scan reference for lookup().
  [[nodiscard]] const PreMotionEntry* lookup_scan(const Eigen::Vector3d& p, JumpMode mode,
                                                  double r = 0.05) const;

  [[nodiscard]] const std::vector<PreMotionEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool contains_id(std::int64_t id) const;

  /// Writes `premotion.index` and `premotion.dat` into `dir`.
  void save(const std::filesystem::path& dir) const;
  /// Throws LibraryError with the offending line on any corruption.
  static PreMotionLibrary load(const std::filesystem::path& dir);

  [[nodiscard]] std::string record_text() const;
  [[nodiscard]] std::string index_text() const;

 private:
  struct Key {
    int mode;
    std::int64_t i, j, k;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  [[nodiscard]] Key key(const Eigen::Vector3d& p, JumpMode mode) const;

  double cell_;
  std::vector<PreMotionEntry> entries_;  // sorted by id
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> grid_;
};

std::uint64_t fnv1a64(const std::string& bytes);

struct TargetBox {
  Eigen::Vector3d lower = Eigen::Vector3d::Zero();
  Eigen::Vector3d upper = Eigen::Vector3d::Zero();
};

struct GridTarget {
  std::int64_t id = 0;
  JumpMode mode = JumpMode::Omni;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
};

/// Targets lower + k*step per axis up to upper (inclusive within 1e-9); mode
/// outermost, then boxes in order, then x, y, z. Ids are positions in this
/// enumeration.
std::vector<GridTarget> grid_targets(const std::vector<TargetBox>& boxes, double step,
                                     const std::vector<JumpMode>& modes);

struct BuildOptions {
  std::vector<TargetBox> boxes;
  double step = 0.05;
  std::vector<JumpMode> modes{JumpMode::Omni};
  DEConfig config = DEConfig::cold();  // config.seed is the master seed
  ProblemOptions problem;              // mode overridden per target
  int workers = 1;                     // parallel targets
  std::size_t stride = 1;              // keep every stride-th grid target
};

struct BuildFailure {
  std::int64_t id = 0;
  JumpMode mode = JumpMode::Omni;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  std::string reason;
};

struct BuildReport {
  std::size_t attempted = 0;
  std::size_t solved = 0;
  std::size_t skipped = 0;  // already present from a previous partial build
  std::vector<BuildFailure> failures;
};

/// Solves every grid target cold and stores the feasible ones. When `dir` is
/// given the library is saved there after every batch and an existing partial
/// build in `dir` is resumed; failures go to `premotion.failures`.
BuildReport build_library(PreMotionLibrary& library, const RobotParams& params,
                          const BuildOptions& options,
                          const std::optional<std::filesystem::path>& dir = std::nullopt,
                          const std::function<void(const std::string&)>& log = {});

/// Ids of entries whose stored vector no longer evaluates below epsilon.
std::vector<std::int64_t> verify_library(const PreMotionLibrary& library, const RobotParams& params,
                                         const ProblemOptions& options, double epsilon = 1e4);

}  // namespace omnijump
