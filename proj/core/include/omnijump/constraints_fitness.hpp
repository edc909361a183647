#pragma once

#include "omnijump/leg_kinematics.hpp"
#include "omnijump/robot_model.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace omnijump {

enum class ConstraintKind {
  ContactForce,
  FrictionCone,
  Zmp,
  JointAngle,
  JointVelocity,
  JointPosition,
  JointTorque,
};
inline constexpr std::size_t kConstraintCount = 7;

/// Penalty exponent n of each constraint class.
int priority(ConstraintKind k);
const char* constraint_name(ConstraintKind k);

struct ConstraintEntry {
  ConstraintKind kind = ConstraintKind::ContactForce;
  int priority = 0;
  double sigma = 0.0;  // worst deficit over the trajectory, native unit
  bool active = false;  // sigma > 0
  double first_time = -1.0;  // first offending sample time, s
};

struct ConstraintReport {
  std::array<ConstraintEntry, kConstraintCount> entries{};
  double energy = 0.0;  // J
  // Candidates that never reach a trajectory (bad phase order, transform failure).
  bool structural = false;
  double structural_magnitude = 0.0;
  std::string structural_reason;

  ConstraintReport();
  [[nodiscard]] const ConstraintEntry& at(ConstraintKind k) const;
  ConstraintEntry& at(ConstraintKind k);
  void set(ConstraintKind k, double sigma);
  [[nodiscard]] bool feasible() const;
};

/// One leg at one trajectory sample.
struct LegSample {
  bool on_ground = false;  // foot pinned: kinematic checks apply
  bool loaded = false;     // foot carries force: force checks apply
  bool reachable = true;
  double reach_deficit = 0.0;
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
  JointVector tau = JointVector::Zero();
  Eigen::Vector3d force = Eigen::Vector3d::Zero();  // world-frame GRF on the robot
  double joint_angle_violation = 0.0;
  double min_joint_height = 1.0;
};

struct TrajectorySample {
  double t = 0.0;
  PlanarState state;
  std::vector<LegSample> legs;
  bool zmp_valid = false;
  double zmp = 0.0;
};

struct ZmpBounds {
  bool enabled = false;
  double lower = 0.0;
  double upper = 0.0;
};

ConstraintReport evaluate_constraints(std::span<const TrajectorySample> samples,
                                      const RobotParams& params, const ZmpBounds& zmp = {});

/// Trapezoid integral of power samples over times.
double energy(std::span<const double> t, std::span<const double> power);
/// Sum over legs on the ground of sum_j |tau_j qd_j| at one sample.
double mechanical_power(const TrajectorySample& s);
double energy(std::span<const TrajectorySample> samples);

/// Structural failures score far above any constraint penalty.
inline constexpr double kStructuralPenalty = 1e24;

/// sum W_n (10^(n+3) + 10^n sigma_n) + energy.
double fitness(const ConstraintReport& report);

/// Multi-line human-readable record of a report.
std::string report_to_text(const ConstraintReport& report);

}  // namespace omnijump
