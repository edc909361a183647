#include "omnijump/leg_kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace omnijump {

namespace {

// Reach slack so that boundary poses such as the straight leg still solve.
constexpr double kReachTol = 1e-9;

Eigen::Matrix3d rot_x(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}

Eigen::Matrix3d rot_x_deriv(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix3d d;
  d << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return d;
}

struct Planar2 {
  bool ok;
  double deficit;
  double hip;
  double knee;
};

// Two-link chain measured from straight down. knee_sign picks the branch.
Planar2 planar_ik(double x, double z, double l1, double l2, double knee_sign) {
  const double d = std::hypot(x, z);
  const double outer = l1 + l2;
  const double inner = std::abs(l1 - l2);
  if (d > outer + kReachTol) return {false, d - outer, 0, 0};
  if (d < inner - kReachTol) return {false, inner - d, 0, 0};
  const double c = std::clamp((d * d - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0);
  const double knee = knee_sign * std::acos(c);
  const double hip = std::atan2(x, -z) - std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));
  return {true, 0.0, hip, knee};
}

}  // namespace

LegSide::LegSide(int i) : index(i) {
  if (i < 1 || i > 4) throw std::invalid_argument("leg index must be in 1..4");
}

Eigen::Vector3d fk(const JointVector& q, LegSide side, const RobotParams& params) {
  const double l0 = params.leg_lengths[0];
  const double l1 = params.leg_lengths[1];
  const double l2 = params.leg_lengths[2];
  const Eigen::Vector3d leg(l1 * std::sin(q[1]) + l2 * std::sin(q[1] + q[2]),
                            side.lateral_sign() * l0,
                            -l1 * std::cos(q[1]) - l2 * std::cos(q[1] + q[2]));
  return params.hip_offsets[side.slot()] + rot_x(q[0]) * leg;
}

IkResult try_ik(const Eigen::Vector3d& p_foot, LegSide side, const RobotParams& params) {
  const double l0 = params.leg_lengths[0];
  const Eigen::Vector3d p = p_foot - params.hip_offsets[side.slot()];
  const double r2 = p.y() * p.y() + p.z() * p.z();
  if (r2 < l0 * l0) return {false, l0 - std::sqrt(r2), JointVector::Zero()};
  const double z_leg = -std::sqrt(r2 - l0 * l0);
  const double sl0 = side.lateral_sign() * l0;
  const double ab = std::atan2(p.z(), p.y()) - std::atan2(z_leg, sl0);

  const Planar2 pl = planar_ik(p.x(), z_leg, params.leg_lengths[1], params.leg_lengths[2], 1.0);
  if (!pl.ok) return {false, pl.deficit, JointVector::Zero()};
  return {true, 0.0, JointVector(wrap_angle(ab), wrap_angle(pl.hip), pl.knee)};
}

JointVector ik(const Eigen::Vector3d& p_foot, LegSide side, const RobotParams& params) {
  const IkResult r = try_ik(p_foot, side, params);
  if (!r.ok)
    throw UnreachableError("ik: foot target out of reach by " + std::to_string(r.deficit) + " m",
                           r.deficit);
  return r.q;
}

Eigen::Matrix3d jacobian(const JointVector& q, LegSide side, const RobotParams& params) {
  const double l0 = params.leg_lengths[0];
  const double l1 = params.leg_lengths[1];
  const double l2 = params.leg_lengths[2];
  const double s1 = std::sin(q[1]);
  const double c1 = std::cos(q[1]);
  const double s12 = std::sin(q[1] + q[2]);
  const double c12 = std::cos(q[1] + q[2]);
  const Eigen::Vector3d leg(l1 * s1 + l2 * s12, side.lateral_sign() * l0, -l1 * c1 - l2 * c12);
  const Eigen::Matrix3d r = rot_x(q[0]);

  Eigen::Matrix3d j;
  j.col(0) = rot_x_deriv(q[0]) * leg;
  j.col(1) = r * Eigen::Vector3d(l1 * c1 + l2 * c12, 0.0, l1 * s1 + l2 * s12);
  j.col(2) = r * Eigen::Vector3d(l2 * c12, 0.0, l2 * s12);
  return j;
}

Eigen::Vector3d joint_torque(const JointVector& q, LegSide side,
                             const Eigen::Vector3d& foot_force, const RobotParams& params) {
  return -jacobian(q, side, params).transpose() * foot_force;
}

std::array<Eigen::Vector3d, 3> joint_positions(const JointVector& q, LegSide side,
                                               const RobotParams& params) {
  const Eigen::Vector3d& hip = params.hip_offsets[side.slot()];
  const Eigen::Matrix3d r = rot_x(q[0]);
  const double sl0 = side.lateral_sign() * params.leg_lengths[0];
  const double l1 = params.leg_lengths[1];
  return {hip, hip + r * Eigen::Vector3d(0.0, sl0, 0.0),
          hip + r * Eigen::Vector3d(l1 * std::sin(q[1]), sl0, -l1 * std::cos(q[1]))};
}

Eigen::Vector3d impedance_torque(const JointVector& q, const JointVector& qd,
                                 const Eigen::Vector3d& p_fd, const Eigen::Vector3d& v_fd,
                                 const Eigen::Vector3d& f_ff, const ImpedanceGains& gains,
                                 LegSide side, const RobotParams& params) {
  const Eigen::Matrix3d j = jacobian(q, side, params);
  const Eigen::Vector3d p_f = fk(q, side, params);
  const Eigen::Vector3d v_f = j * qd;
  const Eigen::Vector3d f_cart =
      gains.kp.cwiseProduct(p_fd - p_f) + gains.kd.cwiseProduct(v_fd - v_f);
  return j.transpose() * f_cart - j.transpose() * f_ff;
}

Eigen::Vector3d landing_feedforward(const RobotParams& params, int stance_feet) {
  if (stance_feet < 1) throw std::invalid_argument("landing_feedforward: no stance feet");
  return {0.0, 0.0, params.mass * params.gravity / stance_feet};
}

// ---------------------------------------------------------------------------

Eigen::Vector3d humanoid_fk(const JointVector& q, const RobotParams& params) {
  const double l1 = params.leg_lengths[0];
  const double l2 = params.leg_lengths[1];
  return {l1 * std::sin(q[0]) + l2 * std::sin(q[0] + q[1]),
          -l1 * std::cos(q[0]) - l2 * std::cos(q[0] + q[1]), -(q[0] + q[1] + q[2])};
}

IkResult humanoid_ik(const Eigen::Vector3d& foot, const RobotParams& params) {
  const Planar2 pl =
      planar_ik(foot.x(), foot.y(), params.leg_lengths[0], params.leg_lengths[1], -1.0);
  if (!pl.ok) return {false, pl.deficit, JointVector::Zero()};
  const double hip = wrap_angle(pl.hip);
  return {true, 0.0, JointVector(hip, pl.knee, wrap_angle(-foot.z() - hip - pl.knee))};
}

Eigen::Matrix3d humanoid_jacobian(const JointVector& q, const RobotParams& params) {
  const double l1 = params.leg_lengths[0];
  const double l2 = params.leg_lengths[1];
  const double c1 = std::cos(q[0]);
  const double s1 = std::sin(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  const double s12 = std::sin(q[0] + q[1]);
  Eigen::Matrix3d j;
  j << l1 * c1 + l2 * c12, l2 * c12, 0.0,  //
      l1 * s1 + l2 * s12, l2 * s12, 0.0,   //
      -1.0, -1.0, -1.0;
  return j;
}

Eigen::Vector3d humanoid_joint_torque(const JointVector& q, const Eigen::Vector3d& wrench,
                                      const RobotParams& params) {
  return -humanoid_jacobian(q, params).transpose() * wrench;
}

// ---------------------------------------------------------------------------

BodyPose body_pose(const PlanarState& s, const StanceGeometry& stance) {
  BodyPose pose;
  pose.p = Eigen::Vector3d(stance.origin_xy.x(), stance.origin_xy.y(), 0.0) +
           s.x * stance.axis_j + s.z * Eigen::Vector3d::UnitZ();
  pose.r = Eigen::AngleAxisd(s.theta, stance.normal()).toRotationMatrix();
  return pose;
}

namespace {

double limit_violation(const JointVector& q, const RobotParams& params) {
  double v = 0.0;
  for (int j = 0; j < 3; ++j) {
    v = std::max(v, params.joint_min[j] - q[j]);
    v = std::max(v, q[j] - params.joint_max[j]);
  }
  return v;
}

}  // namespace

CSpaceResult c_space_contains(const PlanarState& s, const StanceGeometry& stance,
                              const RobotParams& params) {
  const BodyPose pose = body_pose(s, stance);
  CSpaceResult out;
  out.inside = true;
  for (int leg : stance.stance_legs) {
    LegDiagnostic d;
    d.leg = leg;
    const Eigen::Vector3d foot_body = pose.r.transpose() * (stance.feet[leg] - pose.p);
    if (params.platform == Platform::Quadruped) {
      const LegSide side(leg + 1);
      const IkResult r = try_ik(foot_body, side, params);
      d.reachable = r.ok;
      d.reach_deficit = r.deficit;
      if (r.ok) {
        d.q = r.q;
        d.joint_angle_violation = limit_violation(r.q, params);
        d.min_joint_height = std::numeric_limits<double>::infinity();
        for (const auto& jp : joint_positions(r.q, side, params))
          d.min_joint_height = std::min(d.min_joint_height, (pose.p + pose.r * jp).z());
      }
    } else {
      const Eigen::Vector3d& hip = params.hip_offsets[static_cast<std::size_t>(leg)];
      const Eigen::Vector3d rel = foot_body - hip;
      const IkResult r = humanoid_ik({rel.x(), rel.z(), -s.theta}, params);
      d.reachable = r.ok;
      d.reach_deficit = r.deficit;
      if (r.ok) {
        d.q = r.q;
        d.joint_angle_violation = limit_violation(r.q, params);
        const Eigen::Vector3d knee_body =
            hip + Eigen::Vector3d(params.leg_lengths[0] * std::sin(r.q[0]), 0.0,
                                  -params.leg_lengths[0] * std::cos(r.q[0]));
        d.min_joint_height = std::min((pose.p + pose.r * hip).z(), (pose.p + pose.r * knee_body).z());
      }
    }
    const bool ok = d.reachable && d.joint_angle_violation <= 0.0 &&
                    d.min_joint_height > params.min_joint_height;
    out.inside = out.inside && ok;
    out.legs.push_back(d);
  }
  return out;
}

StanceGeometry nominal_stance(const RobotParams& params, const Eigen::Vector3d& axis_j) {
  StanceGeometry st;
  st.axis_j = axis_j;
  for (std::size_t i = 0; i < params.hip_offsets.size(); ++i) {
    Eigen::Vector3d foot = params.hip_offsets[i];
    if (params.platform == Platform::Quadruped)
      foot.y() += LegSide(static_cast<int>(i) + 1).lateral_sign() * params.leg_lengths[0];
    else
      foot.y() = 0.0;  // both humanoid ankles share the sagittal contact point
    foot.z() = 0.0;
    st.feet.push_back(foot);
    st.stance_legs.push_back(static_cast<int>(i));
  }
  return st;
}

}  // namespace omnijump
