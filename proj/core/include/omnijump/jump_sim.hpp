#pragma once

#include "omnijump/jump_problem.hpp"

#include <string>
#include <vector>

namespace omnijump {

struct SimOutcome {
  JumpMode mode = JumpMode::Omni;
  JumpTrajectory trajectory;           // planar schedule at the simulation step
  std::vector<ReducedState> stance;    // 3D body at the stance nodes
  std::vector<ReducedState> flight;    // 3D body during flight, one per step
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  ReducedState liftoff;
  ReducedState landing;
  double target_error = 0.0;  // |landing CoM - target|, m
  double landing_pitch = 0.0;  // planar pitch at touchdown, rad
  ConstraintReport report;
  bool c_space_exit = false;
  double c_space_exit_time = 0.0;
  std::vector<std::string> warnings;
};

/// Re-solves the force profile at step `dt`, replays it through the 3D single
/// rigid body with the per-leg forces, then flies ballistically to touchdown.
/// Throws TransformError when the profile cannot be realised at this step.
SimOutcome simulate_jump(const OptVector& opt, const JumpProblem& problem, double dt);

struct ZmpRecord {
  double t = 0.0;
  double zmp = 0.0;  // m along the sole, toe positive
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = true;  // strictly inside (lower, upper)
};

/// p_zmp = -tau / u_z against the open sole interval.
ZmpRecord zmp_record(double t, double tau, double u_z, double lower, double upper);

struct HumanoidOutcome {
  SimOutcome sim;
  std::vector<ZmpRecord> zmp;
  bool zmp_ok = true;
  double first_zmp_violation = -1.0;  // s, -1 when none
  double flight_distance = 0.0;       // horizontal CoM displacement, m
  Eigen::Vector3d peak_torque = Eigen::Vector3d::Zero();  // hip, knee, ankle |tau| max
  double peak_ground_force = 0.0;     // max total vertical force, N
};

HumanoidOutcome simulate_humanoid(const OptVector& opt, const JumpProblem& problem, double dt);

}  // namespace omnijump
