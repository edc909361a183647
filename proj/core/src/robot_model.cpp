#include "omnijump/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omnijump {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_finite(const Eigen::Vector3d& v) { return v.allFinite(); }

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    Eigen::Matrix3d k;
    k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return Eigen::Matrix3d::Identity() + k;
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

}  // namespace

void RobotParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be > 0");
  if (!(inertia_diag.array() > 0.0).all() || !inertia_diag.allFinite())
    throw std::invalid_argument("inertia_diag components must be > 0");
  const std::size_t want_lengths = platform == Platform::Quadruped ? 3 : 4;
  if (leg_lengths.size() != want_lengths)
    throw std::invalid_argument("leg_lengths must have " + std::to_string(want_lengths) +
                                " entries");
  for (double l : leg_lengths)
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("leg lengths must be > 0");
  const std::size_t want_legs = platform == Platform::Quadruped ? 4 : 2;
  if (hip_offsets.size() != want_legs)
    throw std::invalid_argument("hip_offsets must have " + std::to_string(want_legs) +
                                " entries");
  for (int j = 0; j < 3; ++j) {
    if (!(joint_min[j] < joint_max[j]))
      throw std::invalid_argument("joint_limits: q_min must be < q_max for joint " +
                                  std::to_string(j));
    if (!(torque_limits[j] > 0.0)) throw std::invalid_argument("torque_limits must be > 0");
    if (!(velocity_limits[j] > 0.0))
      throw std::invalid_argument("velocity_limits must be > 0");
  }
  if (!(friction_coeff > 0.0)) throw std::invalid_argument("friction_coeff must be > 0");
  if (!(gravity > 0.0)) throw std::invalid_argument("gravity must be > 0");
  if (!(stand_height > 0.0)) throw std::invalid_argument("stand_height must be > 0");
}

RobotParams mini_cheetah_params() {
  RobotParams p;
  p.name = "mini_cheetah";
  p.platform = Platform::Quadruped;
  p.mass = 11.4;
  p.inertia_diag = {0.07, 0.3, 0.34};
  p.leg_lengths = {0.072, 0.211, 0.2};
  p.hip_offsets = {{0.19, 0.049, 0.0}, {0.19, -0.049, 0.0}, {-0.19, 0.049, 0.0},
                   {-0.19, -0.049, 0.0}};
  const double deg = kPi / 180.0;
  p.joint_min = {-2 * kPi, -2 * kPi, 10 * deg};
  p.joint_max = {2 * kPi, 2 * kPi, 170 * deg};
  p.torque_limits = {24.0, 24.0, 36.0};
  const double rpm = 2 * kPi / 60.0;
  p.velocity_limits = {300 * rpm, 300 * rpm, 193 * rpm};
  p.friction_coeff = 0.7;
  p.stand_height = 0.15;
  return p;
}

RobotParams cyberdog_params() {
  RobotParams p = mini_cheetah_params();
  p.name = "cyberdog";
  p.mass = 14.0;
  p.inertia_diag = {0.08, 0.4, 0.45};
  p.leg_lengths = {0.107, 0.2, 0.217};
  p.hip_offsets = {{0.2355, 0.05, 0.0}, {0.2355, -0.05, 0.0}, {-0.2355, 0.05, 0.0},
                   {-0.2355, -0.05, 0.0}};
  return p;
}

RobotParams humanoid_params() {
  RobotParams p;
  p.name = "humanoid";
  p.platform = Platform::Humanoid;
  p.mass = 47.0;
  p.inertia_diag = {11.6, 9.9, 2.0};
  p.leg_lengths = {0.366, 0.340, 0.180, 0.120};
  // Hip joints sit below the CoM; lateral offsets only matter for bookkeeping.
  p.hip_offsets = {{0.0, 0.1, -0.12}, {0.0, -0.1, -0.12}};
  p.joint_min = {-1.6, -2.6, -1.0};
  p.joint_max = {2.4, -0.05, 1.0};
  p.torque_limits = {417.0, 320.0, 216.0};
  p.velocity_limits = {20.0, 20.0, 20.0};
  p.friction_coeff = 0.7;
  p.stand_height = 0.78;
  p.min_joint_height = 0.05;
  return p;
}

RobotParams preset_params(const std::string& name) {
  if (name == "mini_cheetah") return mini_cheetah_params();
  if (name == "cyberdog") return cyberdog_params();
  if (name == "humanoid") return humanoid_params();
  throw std::invalid_argument("unknown robot preset: " + name);
}

double wrap_angle(double a) {
  a = std::remainder(a, 2 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

Eigen::Matrix3d rotation_from_euler(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d euler_from_rotation(const Eigen::Matrix3d& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll = 0.0;
  double yaw = 0.0;
  if (std::abs(std::cos(pitch)) > 1e-9) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: fold everything into yaw.
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

Eigen::Matrix3d ReducedState::rotation() const { return rotation_from_euler(euler); }

SrbAcceleration srb_acceleration(const ReducedState& state,
                                 std::span<const Eigen::Vector3d> foot_forces,
                                 std::span<const Eigen::Vector3d> foot_positions,
                                 const RobotParams& params) {
  if (foot_forces.size() != foot_positions.size())
    throw std::invalid_argument("srb_acceleration: force/position count mismatch");
  if (!all_finite(state.p_com) || !all_finite(state.euler) || !all_finite(state.v_com) ||
      !all_finite(state.omega_b))
    throw std::invalid_argument("srb_acceleration: non-finite state");

  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector3d torque_w = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < foot_forces.size(); ++i) {
    if (!all_finite(foot_forces[i]) || !all_finite(foot_positions[i]))
      throw std::invalid_argument("srb_acceleration: non-finite contact input");
    force += foot_forces[i];
    torque_w += (foot_positions[i] - state.p_com).cross(foot_forces[i]);
  }

  const Eigen::Matrix3d inertia = params.inertia();
  const Eigen::Vector3d& w = state.omega_b;
  const Eigen::Vector3d torque_b = state.rotation().transpose() * torque_w;

  SrbAcceleration out;
  out.linear = force / params.mass - params.gravity * Eigen::Vector3d::UnitZ();
  out.angular = inertia.inverse() * (torque_b - w.cross(inertia * w));
  return out;
}

ReducedState integrate_step(const ReducedState& state, const SrbAcceleration& accel,
                            double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_step: dt must be > 0");
  ReducedState next;
  next.v_com = state.v_com + accel.linear * dt;
  next.p_com = state.p_com + next.v_com * dt;
  next.omega_b = state.omega_b + accel.angular * dt;
  const Eigen::Matrix3d r = state.rotation() * so3_exp(next.omega_b * dt);
  next.euler = euler_from_rotation(r);
  if (!next.p_com.allFinite() || !next.v_com.allFinite() || !next.omega_b.allFinite() ||
      !next.euler.allFinite())
    throw std::invalid_argument("integrate_step: non-finite state");
  return next;
}

bool PlanarState::finite() const {
  return std::isfinite(x) && std::isfinite(z) && std::isfinite(theta) &&
         std::isfinite(vx) && std::isfinite(vz) && std::isfinite(omega);
}

std::vector<PlanarState> planar_rollout(const PlanarState& initial,
                                        std::span<const PlanarLoad> loads,
                                        const PlanarBody& body, double dt) {
  if (loads.empty()) throw std::invalid_argument("planar_rollout: empty load profile");
  if (!(dt > 0.0)) throw std::invalid_argument("planar_rollout: dt must be > 0");
  if (!(body.mass > 0.0) || !(body.inertia > 0.0))
    throw std::invalid_argument("planar_rollout: body mass and inertia must be > 0");

  std::vector<PlanarState> out;
  out.reserve(loads.size() + 1);
  out.push_back(initial);
  PlanarState s = initial;
  for (const PlanarLoad& load : loads) {
    double fj = 0.0;
    double fz = 0.0;
    double tau = load.couple;
    for (int i = 0; i < load.count; ++i) {
      const PlanarPointForce& f = load.forces[static_cast<std::size_t>(i)];
      fj += f.f_j;
      fz += f.f_z;
      tau += planar_moment(f, s.x, s.z);
    }
    s.vx += fj / body.mass * dt;
    s.vz += (fz / body.mass - body.gravity) * dt;
    s.omega += tau / body.inertia * dt;
    s.x += s.vx * dt;
    s.z += s.vz * dt;
    s.theta += s.omega * dt;
    if (!s.finite()) throw std::invalid_argument("planar_rollout: non-finite state");
    out.push_back(s);
  }
  return out;
}

}  // namespace omnijump
