#pragma once

#include "omnijump/robot_model.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace omnijump {

/// Quadruped leg numbering: 1 front-left, 2 front-right, 3 rear-left, 4 rear-right.
struct LegSide {
  int index = 1;

  explicit LegSide(int i);
  /// +1 for left legs, -1 for right legs.
  [[nodiscard]] double lateral_sign() const { return (index % 2 == 1) ? 1.0 : -1.0; }
  [[nodiscard]] std::size_t slot() const { return static_cast<std::size_t>(index - 1); }
};

/// Joint order (abduction, hip, knee) for quadrupeds, (hip, knee, ankle) for humanoids.
using JointVector = Eigen::Vector3d;

class UnreachableError : public std::runtime_error {
 public:
  UnreachableError(const std::string& what, double deficit)
      : std::runtime_error(what), deficit_(deficit) {}
  /// Distance (m) by which the target misses the reachable set.
  [[nodiscard]] double deficit() const { return deficit_; }

 private:
  double deficit_;
};

// ---------------------------------------------------------------------------
// Quadruped 3-DOF leg. Zero pose hangs straight down; positive knee folds the
// shank backward. Positions are body frame.

Eigen::Vector3d fk(const JointVector& q, LegSide side, const RobotParams& params);

/// Knee-backward solution. Throws UnreachableError outside the reach annulus.
JointVector ik(const Eigen::Vector3d& p_foot, LegSide side, const RobotParams& params);

struct IkResult {
  bool ok = false;
  double deficit = 0.0;  // > 0 when !ok
  JointVector q = JointVector::Zero();
};
IkResult try_ik(const Eigen::Vector3d& p_foot, LegSide side, const RobotParams& params);

Eigen::Matrix3d jacobian(const JointVector& q, LegSide side, const RobotParams& params);

/// Joint torques that produce `foot_force` (body frame) on the ground, so that the
/// ground pushes the robot with `foot_force`: tau = -J^T f.
Eigen::Vector3d joint_torque(const JointVector& q, LegSide side,
                             const Eigen::Vector3d& foot_force, const RobotParams& params);

/// Body-frame positions of the abduction, hip and knee joints.
std::array<Eigen::Vector3d, 3> joint_positions(const JointVector& q, LegSide side,
                                               const RobotParams& params);

struct ImpedanceGains {
  Eigen::Vector3d kp{500.0, 500.0, 350.0};
  Eigen::Vector3d kd{14.0, 14.0, 14.0};
};

/// tau = J^T (Kp (p_fd - p_f) + Kd (v_fd - v_f)) - J^T f_ff.
Eigen::Vector3d impedance_torque(const JointVector& q, const JointVector& qd,
                                 const Eigen::Vector3d& p_fd, const Eigen::Vector3d& v_fd,
                                 const Eigen::Vector3d& f_ff, const ImpedanceGains& gains,
                                 LegSide side, const RobotParams& params);

/// Default landing feedforward per stance foot: weight shared over the feet in contact.
Eigen::Vector3d landing_feedforward(const RobotParams& params, int stance_feet);

// ---------------------------------------------------------------------------
// Humanoid planar leg: hip, knee (forward, q_knee < 0), ankle. Positions are in
// the body sagittal plane relative to the hip: (x forward, z up, foot pitch).

Eigen::Vector3d humanoid_fk(const JointVector& q, const RobotParams& params);
IkResult humanoid_ik(const Eigen::Vector3d& foot, const RobotParams& params);
Eigen::Matrix3d humanoid_jacobian(const JointVector& q, const RobotParams& params);
/// Joint torques for a ground wrench (f_x, f_z, tau_y) acting on the robot.
Eigen::Vector3d humanoid_joint_torque(const JointVector& q, const Eigen::Vector3d& wrench,
                                      const RobotParams& params);

// ---------------------------------------------------------------------------
// Configuration-space membership

/// Where the stance feet are and how planar states map to body poses.
struct StanceGeometry {
  Eigen::Vector3d axis_j = Eigen::Vector3d::UnitX();  // horizontal jump axis
  Eigen::Vector2d origin_xy = Eigen::Vector2d::Zero();  // world CoM xy at x_J = 0
  std::vector<Eigen::Vector3d> feet;                    // world frame, one per leg
  std::vector<int> stance_legs;                         // 0-based legs in contact

  [[nodiscard]] Eigen::Vector3d normal() const {
    return Eigen::Vector3d::UnitZ().cross(axis_j);
  }
};

struct BodyPose {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
};

/// CoM at origin + x J + z e_z, pitched by theta about the plane normal.
BodyPose body_pose(const PlanarState& s, const StanceGeometry& stance);

struct LegDiagnostic {
  int leg = 0;
  bool reachable = false;
  double reach_deficit = 0.0;
  JointVector q = JointVector::Zero();
  double joint_angle_violation = 0.0;  // rad beyond [q_min, q_max]
  double min_joint_height = 0.0;       // lowest non-foot joint, world z
};

struct CSpaceResult {
  bool inside = false;
  std::vector<LegDiagnostic> legs;
};

/// Solves IK for every stance leg at the given planar state.
CSpaceResult c_space_contains(const PlanarState& s, const StanceGeometry& stance,
                              const RobotParams& params);

/// Feet directly below the hips (quadruped: outboard by L0) for a body at rest.
StanceGeometry nominal_stance(const RobotParams& params, const Eigen::Vector3d& axis_j);

}  // namespace omnijump
