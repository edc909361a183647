#pragma once

#include "omnijump/constraints_fitness.hpp"
#include "omnijump/grf_profile.hpp"
#include "omnijump/jump_plane.hpp"
#include "omnijump/leg_kinematics.hpp"
#include "omnijump/robot_model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace omnijump {

/// Box bounds of the decision vector; the first c_dims entries are waypoint
/// (C-space) dimensions, the rest are phase times (T-space).
struct SearchSpace {
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t c_dims = 0;

  [[nodiscard]] std::size_t dims() const { return lower.size(); }
  /// Throws std::invalid_argument unless bounds are finite with lower < upper.
  void validate() const;
  [[nodiscard]] bool contains(const std::vector<double>& x) const;
};

/// How the "t2 < 0.3" clause of the phase-time box is read.
enum class TimeReading {
  PhaseEnd,       // t2 itself below the cap (default)
  PhaseDuration,  // t2 - t1 below the cap
};

class TargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JumpTarget {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // (x, y) displacement, z landing CoM height
  double yaw = 0.0;
  double pitch = 0.0;  // landing pitch for agile flips, rad
  bool vertical = false;
};

struct ProblemOptions {
  JumpMode mode = JumpMode::Omni;
  double dt = 1e-3;
  TimeReading reading = TimeReading::PhaseEnd;
  int phase2_edge = 2;
  double t1_min = 0.1;
  double t_max = 0.5;
  double t2_cap = 0.3;
  double flight_max = 0.6;
};

struct Evaluation {
  double fitness = 0.0;
  ConstraintReport report;
};

struct JumpTrajectory {
  JumpMode mode = JumpMode::Omni;
  GRFProfile profile;
  PhaseTimes times;
  TimeGrid grid;
  std::vector<TrajectorySample> samples;    // grid nodes 0..N
  std::vector<std::array<double, 4>> u;     // channel values at the nodes
  PlanarState liftoff;
  PlanarState landing;  // planar state at t3
};

class JumpProblem {
 public:
  /// Throws PlaneError for a degenerate plane and TargetError for targets the
  /// platform cannot land on.
  JumpProblem(const RobotParams& params, const JumpTarget& target, const ProblemOptions& options);

  [[nodiscard]] const RobotParams& params() const { return params_; }
  [[nodiscard]] const JumpTarget& target() const { return target_; }
  [[nodiscard]] const ProblemOptions& options() const { return options_; }
  [[nodiscard]] const PlanarJumpModel& model() const { return model_; }
  [[nodiscard]] const JumpPlaneSpec& plane() const { return plane_; }
  [[nodiscard]] const StanceGeometry& stance() const { return stance_; }
  [[nodiscard]] const SearchSpace& space() const { return space_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

  /// Body-frame foot positions relative to the starting CoM (quadruped).
  [[nodiscard]] std::vector<Eigen::Vector3d> stance_feet_body() const;

  /// World CoM position the landing should reach for this decision vector.
  [[nodiscard]] Eigen::Vector3d target_world(const OptVector& opt) const;

  /// Phase-time box membership beyond what the search box enforces; returns the
  /// violation magnitude (0 when inside).
  [[nodiscard]] double time_violation(const PhaseTimes& t) const;

  /// Never throws: failures become structural reports.
  [[nodiscard]] Evaluation evaluate(const OptVector& opt) const;

  /// Throws TransformError when the waypoints cannot be realised.
  [[nodiscard]] JumpTrajectory trajectory(const OptVector& opt) const;

  /// Same problem on a different integration step.
  [[nodiscard]] JumpProblem with_dt(double dt) const;

  [[nodiscard]] OptVector make_vector(std::vector<double> v) const {
    return OptVector{options_.mode, std::move(v)};
  }

 private:
  void build_space();

  RobotParams params_;
  JumpTarget target_;
  ProblemOptions options_;
  JumpPlaneSpec plane_;
  StanceGeometry stance_;
  PlanarJumpModel model_;
  SearchSpace space_;
  std::vector<std::string> warnings_;
};

}  // namespace omnijump
