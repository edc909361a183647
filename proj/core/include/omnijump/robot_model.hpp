#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace omnijump {

enum class Platform { Quadruped, Humanoid };

/// Physical description of one robot platform.
///
/// Joint arrays are indexed per leg joint in chain order from the body:
/// quadruped (abduction, hip, knee), humanoid (hip, knee, ankle).
struct RobotParams {
  std::string name;
  Platform platform = Platform::Quadruped;

  double mass = 0.0;                      // kg
  Eigen::Vector3d inertia_diag = Eigen::Vector3d::Zero();  // kg m^2, body frame
  // Quadruped: (L0 abduction offset, L1 thigh, L2 shank).
  // Humanoid: (L_upper, L_lower, L_toe, L_heel).
  std::vector<double> leg_lengths;
  // Body-frame mounting point of each leg, relative to the CoM.
  // Quadruped order: 1 front-left, 2 front-right, 3 rear-left, 4 rear-right.
  std::vector<Eigen::Vector3d> hip_offsets;

  Eigen::Vector3d joint_min = Eigen::Vector3d::Zero();  // rad
  Eigen::Vector3d joint_max = Eigen::Vector3d::Zero();  // rad
  Eigen::Vector3d torque_limits = Eigen::Vector3d::Zero();    // Nm
  Eigen::Vector3d velocity_limits = Eigen::Vector3d::Zero();  // rad/s

  double friction_coeff = 0.7;
  double gravity = 9.81;

  // Nominal CoM height of the crouched take-off stance.
  double stand_height = 0.15;
  double min_contact_force = 1.0;   // N
  double min_joint_height = 0.05;   // m

  [[nodiscard]] std::size_t leg_count() const { return hip_offsets.size(); }
  [[nodiscard]] Eigen::Matrix3d inertia() const { return inertia_diag.asDiagonal(); }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

RobotParams mini_cheetah_params();
RobotParams cyberdog_params();
RobotParams humanoid_params();

/// Looks up a built-in platform by name ("mini_cheetah", "cyberdog", "humanoid").
/// Throws std::invalid_argument for unknown names.
RobotParams preset_params(const std::string& name);

/// Single-rigid-body state. Euler angles are ZYX (roll, pitch, yaw) in (-pi, pi].
struct ReducedState {
  Eigen::Vector3d p_com = Eigen::Vector3d::Zero();
  Eigen::Vector3d euler = Eigen::Vector3d::Zero();
  Eigen::Vector3d v_com = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega_b = Eigen::Vector3d::Zero();

  [[nodiscard]] Eigen::Matrix3d rotation() const;
};

struct SrbAcceleration {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();  // body frame
};

Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& rpy);
Eigen::Vector3d euler_from_rotation(const Eigen::Matrix3d& r);
double wrap_angle(double a);

/// Newton-Euler accelerations of the single rigid body under point contact
/// forces (world frame) applied at world-frame foot positions.
SrbAcceleration srb_acceleration(const ReducedState& state,
                                 std::span<const Eigen::Vector3d> foot_forces,
                                 std::span<const Eigen::Vector3d> foot_positions,
                                 const RobotParams& params);

/// Semi-implicit Euler: velocities first, then positions with the new velocities.
ReducedState integrate_step(const ReducedState& state, const SrbAcceleration& accel,
                            double dt);

// ---------------------------------------------------------------------------
// Planar (jumping-plane) dynamics

/// CoM state inside the jumping plane: x along J, z up, theta about the plane normal.
struct PlanarState {
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double omega = 0.0;

  [[nodiscard]] bool finite() const;
};

/// A force applied at a fixed world point of the plane.
struct PlanarPointForce {
  double s = 0.0;       // coordinate along J
  double height = 0.0;  // world z of the contact
  double f_j = 0.0;
  double f_z = 0.0;
};

/// Everything acting on the body during one integration step (at most two contacts).
struct PlanarLoad {
  std::array<PlanarPointForce, 2> forces{};
  int count = 0;
  double couple = 0.0;  // pure torque about the plane normal (humanoid ankle)

  void add(const PlanarPointForce& f) { forces[static_cast<std::size_t>(count++)] = f; }
};

struct PlanarBody {
  double mass = 0.0;
  double inertia = 0.0;  // about the plane normal
  double gravity = 9.81;
};

/// Torque about the plane normal n = z x J for a force at (s, height) acting on
/// a body whose CoM sits at (x, z).
inline double planar_moment(const PlanarPointForce& f, double x, double z) {
  return (f.height - z) * f.f_j - (f.s - x) * f.f_z;
}

/// Integrates one step per load. Returns loads.size() + 1 states, the first
/// being `initial`. Throws std::invalid_argument if there are no loads, dt is
/// not positive, or the state becomes non-finite.
std::vector<PlanarState> planar_rollout(const PlanarState& initial,
                                        std::span<const PlanarLoad> loads,
                                        const PlanarBody& body, double dt);

}  // namespace omnijump
