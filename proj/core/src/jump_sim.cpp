#include "omnijump/jump_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace omnijump {

namespace {

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double a = w.norm();
  if (a < 1e-14) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
}

struct Body3 {
  Eigen::Vector3d p;
  Eigen::Vector3d v;
  Eigen::Matrix3d r;
  Eigen::Vector3d w;  // body frame

  [[nodiscard]] ReducedState reduced() const {
    ReducedState s;
    s.p_com = p;
    s.v_com = v;
    s.euler = euler_from_rotation(r);
    s.omega_b = w;
    return s;
  }
};

}  // namespace

SimOutcome simulate_jump(const OptVector& opt, const JumpProblem& problem, double dt) {
  const JumpProblem local = problem.with_dt(dt);
  const RobotParams& params = local.params();
  const StanceGeometry& stance = local.stance();
  const Eigen::Vector3d n = local.plane().axis_n;
  const Eigen::Vector3d j = local.plane().axis_j;
  const bool humanoid = local.options().mode == JumpMode::Humanoid;

  SimOutcome out;
  out.mode = local.options().mode;
  out.trajectory = local.trajectory(opt);
  out.target = local.target_world(opt);
  const JumpTrajectory& tr = out.trajectory;
  out.landing_pitch = tr.landing.theta;

  ZmpBounds zb;
  if (humanoid) {
    zb.enabled = true;
    zb.lower = -params.leg_lengths[3];
    zb.upper = params.leg_lengths[2];
  }
  out.report = evaluate_constraints(tr.samples, params, zb);

  const PlanarState& s0 = tr.samples.front().state;
  const BodyPose pose0 = body_pose(s0, stance);
  Body3 b{pose0.p, s0.vx * j + s0.vz * Eigen::Vector3d::UnitZ(), pose0.r, Eigen::Vector3d::Zero()};
  b.w = b.r.transpose() * (s0.omega * n);

  const Eigen::Matrix3d inertia = params.inertia();
  const Eigen::Matrix3d inv_inertia = inertia.inverse();
  const int steps = tr.grid.steps();
  std::vector<Eigen::Vector3d> forces;
  std::vector<Eigen::Vector3d> points;
  out.stance.push_back(b.reduced());
  for (int k = 0; k < steps; ++k) {
    const TrajectorySample& s = tr.samples[static_cast<std::size_t>(k)];
    forces.clear();
    points.clear();
    for (std::size_t i = 0; i < s.legs.size(); ++i) {
      if (!s.legs[i].loaded) continue;
      forces.push_back(s.legs[i].force);
      points.push_back(stance.feet[i]);
    }
    SrbAcceleration acc = srb_acceleration(b.reduced(), forces, points, params);
    if (humanoid) acc.angular += inv_inertia * (b.r.transpose() * (tr.u[static_cast<std::size_t>(k)][2] * n));
    const double h = tr.grid.step_at(k);
    b.v += acc.linear * h;
    b.p += b.v * h;
    b.w += acc.angular * h;
    b.r = b.r * so3_exp(b.w * h);
    out.stance.push_back(b.reduced());
  }
  out.liftoff = b.reduced();

  for (int k = 0; k <= steps; ++k) {
    const auto& s = tr.samples[static_cast<std::size_t>(k)];
    bool exit = false;
    for (const auto& l : s.legs)
      if (l.on_ground && (!l.reachable || l.joint_angle_violation > 0.0)) exit = true;
    if (exit) {
      out.c_space_exit = true;
      out.c_space_exit_time = s.t;
      char buf[96];
      std::snprintf(buf, sizeof buf, "stance leaves the configuration space at t=%.4f s", s.t);
      out.warnings.emplace_back(buf);
      break;
    }
  }

  // Flight: translation in closed form, attitude integrated torque-free.
  const double flight = tr.times.t3 - tr.times.t2;
  const int nf = std::max(1, static_cast<int>(std::ceil(flight / dt - 1e-9)));
  const double hf = flight / nf;
  const Eigen::Vector3d g(0, 0, -params.gravity);
  const Eigen::Vector3d p_lo = b.p;
  const Eigen::Vector3d v_lo = b.v;
  bool clearance_warned = false;
  for (int k = 1; k <= nf; ++k) {
    const double t = k * hf;
    b.p = p_lo + v_lo * t + 0.5 * g * t * t;
    b.v = v_lo + g * t;
    b.w += inv_inertia * (-b.w.cross(inertia * b.w)) * hf;
    b.r = b.r * so3_exp(b.w * hf);
    out.flight.push_back(b.reduced());
    if (!clearance_warned && k < nf && b.p.z() < params.min_joint_height) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "CoM below ground clearance during flight at t=%.4f s",
                    tr.times.t2 + t);
      out.warnings.emplace_back(buf);
      clearance_warned = true;
    }
  }
  out.landing = b.reduced();
  out.target_error = (out.landing.p_com - out.target).norm();
  return out;
}

ZmpRecord zmp_record(double t, double tau, double u_z, double lower, double upper) {
  ZmpRecord r;
  r.t = t;
  r.lower = lower;
  r.upper = upper;
  r.zmp = -tau / u_z;
  r.feasible = r.zmp > lower && r.zmp < upper;
  return r;
}

HumanoidOutcome simulate_humanoid(const OptVector& opt, const JumpProblem& problem, double dt) {
  if (problem.options().mode != JumpMode::Humanoid)
    throw std::invalid_argument("simulate_humanoid needs a humanoid problem");
  HumanoidOutcome out;
  out.sim = simulate_jump(opt, problem, dt);
  const RobotParams& params = problem.params();
  const JumpTrajectory& tr = out.sim.trajectory;
  const double lower = -params.leg_lengths[3];
  const double upper = params.leg_lengths[2];
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& s = tr.samples[k];
    const auto& u = tr.u[k];
    out.peak_ground_force = std::max(out.peak_ground_force, u[1]);
    for (const auto& l : s.legs)
      if (l.loaded) out.peak_torque = out.peak_torque.cwiseMax(l.tau.cwiseAbs());
    if (!(u[1] > params.min_contact_force)) continue;
    out.zmp.push_back(zmp_record(s.t, u[2], u[1], lower, upper));
    if (!out.zmp.back().feasible && out.zmp_ok) {
      out.zmp_ok = false;
      out.first_zmp_violation = s.t;
    }
  }
  out.flight_distance = out.sim.landing.p_com.x() - out.sim.stance.front().p_com.x();
  return out;
}

}  // namespace omnijump
