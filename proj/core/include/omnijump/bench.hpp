#pragma once

#include "omnijump/premotion.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace omnijump {

/// Compass label of a target seen from the robot: x forward, y left.
enum class Direction { N, NE, E, SE, S, SW, W, NW, Vertical };

const char* direction_name(Direction d);
/// Signs of x and y with a 1e-9 dead band; no horizontal offset is Vertical.
Direction classify_direction(const Eigen::Vector3d& p);

/// Target boxes for range 1, 2 or 3: the forward box, the rear box and the
/// lateral lines x = 0 either side, which start one step off the vertical.
/// Forward reach grows to 1.0, 1.2 and 1.3 m.
std::vector<TargetBox> reference_range(int range, double step = 0.05);

struct SolveRecord {
  std::int64_t id = 0;
  int seed_index = 0;
  JumpMode mode = JumpMode::Omni;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Direction direction = Direction::N;
  bool feasible = false;
  bool success = false;
  double fitness = 0.0;
  double landing_error = 0.0;
  double wall_time = 0.0;
  int generations = 0;
  int generations_to_feasible = -1;
  std::string failure;  // empty on success
  OptVector best;
};

/// One solve with failures (degenerate plane, unreachable target) turned into records.
SolveRecord solve_target(const RobotParams& params, const GridTarget& target,
                         const ProblemOptions& problem, const DEConfig& config,
                         const std::optional<OptVector>& warm = std::nullopt);

struct GridBenchOptions {
  std::vector<TargetBox> boxes;
  double step = 0.05;
  std::size_t stride = 1;
  std::vector<JumpMode> modes{JumpMode::Omni};
  int seeds = 1;
  DEConfig config = DEConfig::cold();  // config.seed is the master seed
  ProblemOptions problem;
  int workers = 1;
};

/// Cold solves of every kept grid target and seed. Seed s of target id uses
/// derive_seed(master, id, s), matching build_library for s = 0.
std::vector<SolveRecord> run_grid(const RobotParams& params, const GridBenchOptions& options,
                                  const std::function<void(const SolveRecord&)>& progress = {});

/// Library of the seed-0 feasible solves, as build_library would store them.
PreMotionLibrary library_from_records(const std::vector<SolveRecord>& records);

struct DirectionStats {
  Direction direction = Direction::N;
  int attempted = 0;
  int succeeded = 0;
  double median_generations = 0.0;
  double mean_wall = 0.0;
  double median_wall = 0.0;
};

std::vector<DirectionStats> summarize(const std::vector<SolveRecord>& records);

struct PairedRecord {
  int index = 0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  std::int64_t library_id = -1;
  double distance = 0.0;
  SolveRecord cold;
  SolveRecord warm;
};

struct PairedOptions {
  int count = 50;
  double radius = 0.05;
  std::uint64_t seed = 1;
  JumpMode mode = JumpMode::Omni;
  DEConfig cold = DEConfig::cold();
  DEConfig warm = DEConfig::warm();
  ProblemOptions problem;
  int workers = 1;
};

/// Targets drawn within `radius` of library entries, each solved cold and
/// warm-started from its nearest entry with the same derived seed.
std::vector<PairedRecord> run_paired(const RobotParams& params, const PreMotionLibrary& library,
                                     const PairedOptions& options);

double median(std::vector<double> v);

/// Generations spent before the solve was feasible; failures count every generation run.
double generations_to_feasibility(const SolveRecord& r);

/// Deterministic CSVs (no wall times) and the timing companions.
std::string records_csv(const std::vector<SolveRecord>& records);
std::string summary_csv(const std::vector<DirectionStats>& stats, bool with_timing);
std::string paired_csv(const std::vector<PairedRecord>& records, bool with_timing);

}  // namespace omnijump
