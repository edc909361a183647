#include "omnijump/jump_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omnijump {

void SearchSpace::validate() const {
  if (lower.size() != upper.size() || lower.empty())
    throw std::invalid_argument("SearchSpace: bound vectors must be non-empty and equal length");
  if (c_dims > lower.size()) throw std::invalid_argument("SearchSpace: c_dims exceeds dimension");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
      throw std::invalid_argument("SearchSpace: dimension " + std::to_string(i) +
                                  " needs finite lower < upper");
}

bool SearchSpace::contains(const std::vector<double>& x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

namespace {

struct Range {
  double lo;
  double hi;
  double step;
};

}  // namespace

JumpProblem::JumpProblem(const RobotParams& params, const JumpTarget& target,
                         const ProblemOptions& options)
    : params_(params), target_(target), options_(options) {
  params_.validate();
  if (!target.p.allFinite() || !std::isfinite(target.yaw) || !std::isfinite(target.pitch))
    throw TargetError("target must be finite");
  if (!(options.dt > 0.0) || options.dt > 1e-3)
    throw std::invalid_argument("integration step must be in (0, 1 ms]");
  if (options.phase2_edge != 1 && options.phase2_edge != 2)
    throw std::invalid_argument("phase2_edge must be 1 or 2");

  const bool humanoid = options.mode == JumpMode::Humanoid;
  if (humanoid != (params.platform == Platform::Humanoid))
    throw std::invalid_argument(std::string("mode ") + mode_name(options.mode) +
                                " does not match platform " + params.name);

  const double horizontal = target.p.head<2>().norm();
  if (horizontal <= 1e-9 && !target.vertical)
    throw PlaneError(
        "degenerate target: zero horizontal displacement defines no jumping plane "
        "(request a vertical jump explicitly)");
  if (!(target.p.z() > params.min_joint_height))
    throw TargetError("landing CoM height " + std::to_string(target.p.z()) +
                      " m is not above the ground clearance");

  if (humanoid) {
    if (std::abs(target.p.y()) > 1e-9)
      throw TargetError("humanoid jumps are sagittal: target y must be 0");
    stance_ = nominal_stance(params_, Eigen::Vector3d::UnitX());
    plane_.theta_tg = 0.0;
    plane_.axis_j = Eigen::Vector3d::UnitX();
    plane_.axis_n = Eigen::Vector3d::UnitY();
  } else {
    const double theta = horizontal > 1e-9 ? std::atan2(target.p.y(), target.p.x()) : 0.0;
    const Eigen::Vector3d axis(std::cos(theta), std::sin(theta), 0.0);
    stance_ = nominal_stance(params_, axis);
    const auto feet = stance_feet_body();
    plane_ = build_plane(target.p, target.yaw, feet, target.vertical);
    stance_.axis_j = plane_.axis_j;
    if (plane_.yaw_requested)
      warnings_.push_back("yaw target ignored: the omnidirectional decision vector has no yaw");
  }

  model_.mode = options.mode;
  model_.dt = options.dt;
  model_.body.mass = params_.mass;
  model_.body.gravity = params_.gravity;
  const Eigen::Vector3d n = plane_.axis_n;
  model_.body.inertia = n.dot(params_.inertia() * n);
  model_.s_j1 = plane_.j1.s;
  model_.s_j2 = plane_.j2.s;
  model_.start = PlanarState{0.0, params_.stand_height, 0.0, 0.0, 0.0, 0.0};
  model_.phase2_edge = options.phase2_edge;
  model_.landing.x = horizontal > 1e-9 ? (humanoid ? target.p.x() : horizontal) : 0.0;
  model_.landing.z = target.p.z();
  model_.landing.theta = options.mode == JumpMode::Agile ? target.pitch : 0.0;

  build_space();
}

std::vector<Eigen::Vector3d> JumpProblem::stance_feet_body() const {
  std::vector<Eigen::Vector3d> out;
  for (const auto& f : stance_.feet) out.push_back(f - Eigen::Vector3d(0, 0, params_.stand_height));
  return out;
}

void JumpProblem::build_space() {
  const bool humanoid = options_.mode == JumpMode::Humanoid;
  const Range rx = humanoid ? Range{-0.6, 0.6, 0.025} : Range{-0.35, 0.35, 0.025};
  const Range rz = humanoid ? Range{0.2, 1.0, 0.025} : Range{0.0, 0.45, 0.025};
  const Range rt{-0.8, 0.8, 0.05};

  double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  double hi[3] = {-lo[0], -lo[1], -lo[2]};
  auto count = [](const Range& r) { return static_cast<int>(std::lround((r.hi - r.lo) / r.step)); };
  for (int i = 0; i <= count(rx); ++i)
    for (int j = 0; j <= count(rz); ++j)
      for (int k = 0; k <= count(rt); ++k) {
        const PlanarState s{rx.lo + i * rx.step, rz.lo + j * rz.step, rt.lo + k * rt.step, 0, 0, 0};
        if (!c_space_contains(s, stance_, params_).inside) continue;
        const double v[3] = {s.x, s.z, s.theta};
        for (int d = 0; d < 3; ++d) {
          lo[d] = std::min(lo[d], v[d]);
          hi[d] = std::max(hi[d], v[d]);
        }
      }
  if (!(lo[0] < hi[0] && lo[1] < hi[1] && lo[2] < hi[2]))
    throw TargetError("the platform has no feasible stance configuration");

  const int triples = options_.mode == JumpMode::Agile ? 3 : (humanoid ? 2 : 1);
  space_ = {};
  for (int t = 0; t < triples; ++t)
    for (int d = 0; d < 3; ++d) {
      space_.lower.push_back(lo[d]);
      space_.upper.push_back(hi[d]);
    }
  space_.c_dims = space_.lower.size();

  const double t2_hi = options_.reading == TimeReading::PhaseEnd
                           ? std::min(options_.t_max, options_.t2_cap)
                           : options_.t_max;
  space_.lower.push_back(options_.t1_min);
  space_.upper.push_back(t2_hi);
  if (options_.mode == JumpMode::Agile) {
    space_.lower.push_back(options_.t1_min);
    space_.upper.push_back(t2_hi);
  }
  space_.lower.push_back(options_.t1_min);
  space_.upper.push_back(t2_hi + options_.flight_max);
  space_.validate();
}

Eigen::Vector3d JumpProblem::target_world(const OptVector& opt) const {
  const PlanarState s0 = start_state(opt, model_);
  const Eigen::Vector3d origin(stance_.origin_xy.x(), stance_.origin_xy.y(), 0.0);
  return origin + (s0.x + model_.landing.x) * plane_.axis_j +
         model_.landing.z * Eigen::Vector3d::UnitZ();
}

double JumpProblem::time_violation(const PhaseTimes& t) const {
  const double dt = options_.dt;
  double v = 0.0;
  auto add = [&](double x) {
    if (x > 0.0) v += x;
  };
  add(options_.t1_min - t.t1);
  add(t.t1 - t.t2);
  add(t.t2 - options_.t_max);
  if (options_.mode == JumpMode::Agile) add(dt - (t.t2 - t.t1));
  if (options_.reading == TimeReading::PhaseEnd) add(t.t2 - options_.t2_cap);
  else add((t.t2 - t.t1) - options_.t2_cap);
  add(dt - (t.t3 - t.t2));
  add((t.t3 - t.t2) - options_.flight_max);
  return v;
}

JumpTrajectory JumpProblem::trajectory(const OptVector& opt) const {
  const TransformResult tr = waypoints_to_profile(opt, model_);
  const PlanarState start = start_state(opt, model_);
  const ProfileRollout ro = rollout_profile(tr.profile, tr.times, model_, start);

  JumpTrajectory out;
  out.mode = options_.mode;
  out.profile = tr.profile;
  out.times = tr.times;
  out.grid = ro.grid;
  const int n = ro.grid.steps();
  const int n1 = ro.grid.n1;

  out.u = ro.u;
  {
    // Left limit of the last pushing segment at lift-off.
    const GRFProfile& p = tr.profile;
    std::array<double, 4> last{};
    for (std::size_t c = 0; c < 4; ++c) {
      if (ro.grid.n2 > 0) {
        const double t = tr.times.t2;
        last[c] = p.gamma * (p.b0[c] + p.b1[c] * t + p.b2[c] * t * t);
      } else {
        last[c] = p.a0[c] + p.a1[c] * tr.times.t1;
      }
    }
    out.u.push_back(last);
  }
  out.liftoff = ro.states.back();
  out.landing = ballistic_target(out.liftoff, tr.times.t3 - tr.times.t2, params_.gravity);

  const bool humanoid = options_.mode == JumpMode::Humanoid;
  const std::size_t legs = stance_.feet.size();
  std::vector<bool> phase1_only(legs, false);
  if (options_.mode == JumpMode::Agile) {
    const PlaneEdge& lifted = options_.phase2_edge == 2 ? plane_.j1 : plane_.j2;
    phase1_only[static_cast<std::size_t>(lifted.m - 1)] = true;
    phase1_only[static_cast<std::size_t>(lifted.l - 1)] = true;
  }
  const auto feet_body = humanoid ? std::vector<Eigen::Vector3d>{} : stance_feet_body();

  out.samples.resize(static_cast<std::size_t>(n + 1));
  StanceGeometry st = stance_;
  for (int k = 0; k <= n; ++k) {
    TrajectorySample& s = out.samples[static_cast<std::size_t>(k)];
    const auto& u = out.u[static_cast<std::size_t>(k)];
    s.t = ro.grid.time_at(k);
    s.state = ro.states[static_cast<std::size_t>(k)];
    s.legs.assign(legs, LegSample{});

    st.stance_legs.clear();
    for (std::size_t i = 0; i < legs; ++i) {
      LegSample& l = s.legs[i];
      l.on_ground = !phase1_only[i] || k <= n1;
      l.loaded = !phase1_only[i] || k < n1;
      if (l.on_ground) st.stance_legs.push_back(static_cast<int>(i));
    }

    std::vector<Eigen::Vector3d> forces(legs, Eigen::Vector3d::Zero());
    if (humanoid) {
      const Eigen::Vector3d f = 0.5 * (u[0] * plane_.axis_j + u[1] * Eigen::Vector3d::UnitZ());
      forces.assign(legs, f);
      if (u[1] > params_.min_contact_force) {
        s.zmp_valid = true;
        s.zmp = -u[2] / u[1];
      }
    } else {
      const auto f4 = decompose({u[0], u[1], u[2], u[3]}, plane_, feet_body);
      forces.assign(f4.begin(), f4.end());
    }

    const BodyPose pose = body_pose(s.state, st);
    const CSpaceResult cs = c_space_contains(s.state, st, params_);
    for (const auto& d : cs.legs) {
      LegSample& l = s.legs[static_cast<std::size_t>(d.leg)];
      l.reachable = d.reachable;
      l.reach_deficit = d.reach_deficit;
      l.q = d.q;
      l.joint_angle_violation = d.joint_angle_violation;
      l.min_joint_height = d.min_joint_height;
    }
    for (std::size_t i = 0; i < legs; ++i) {
      LegSample& l = s.legs[i];
      if (!l.loaded) continue;
      l.force = forces[i];
      if (!l.reachable) continue;
      const Eigen::Vector3d fb = pose.r.transpose() * forces[i];
      if (humanoid)
        l.tau = humanoid_joint_torque(l.q, {fb.x(), fb.z(), 0.5 * u[2]}, params_);
      else
        l.tau = joint_torque(l.q, LegSide(static_cast<int>(i) + 1), fb, params_);
    }
  }

  // Joint rates by finite differences over each leg's ground interval.
  for (std::size_t i = 0; i < legs; ++i) {
    auto ok = [&](int k) {
      if (k < 0 || k > n) return false;
      const LegSample& l = out.samples[static_cast<std::size_t>(k)].legs[i];
      return l.on_ground && l.reachable;
    };
    for (int k = 0; k <= n; ++k) {
      if (!ok(k)) continue;
      const int a = ok(k - 1) ? k - 1 : k;
      const int b = ok(k + 1) ? k + 1 : k;
      if (a == b) continue;
      const auto& sa = out.samples[static_cast<std::size_t>(a)];
      const auto& sb = out.samples[static_cast<std::size_t>(b)];
      out.samples[static_cast<std::size_t>(k)].legs[i].qd =
          (sb.legs[i].q - sa.legs[i].q) / (sb.t - sa.t);
    }
  }
  return out;
}

Evaluation JumpProblem::evaluate(const OptVector& opt) const {
  Evaluation ev;
  auto structural = [&](double magnitude, const std::string& why) {
    ev.report = ConstraintReport{};
    ev.report.structural = true;
    ev.report.structural_magnitude = magnitude;
    ev.report.structural_reason = why;
    ev.fitness = fitness(ev.report);
    return ev;
  };
  if (opt.mode != options_.mode || opt.v.size() != OptVector::dimension(opt.mode) || !opt.finite())
    return structural(10.0, "malformed decision vector");
  const double tv = time_violation(opt.times());
  if (tv > 0.0) return structural(1.0 + tv, "phase times outside the time box");
  try {
    const JumpTrajectory tr = trajectory(opt);
    ZmpBounds zmp;
    if (options_.mode == JumpMode::Humanoid) {
      zmp.enabled = true;
      zmp.lower = -params_.leg_lengths[3];
      zmp.upper = params_.leg_lengths[2];
    }
    ev.report = evaluate_constraints(tr.samples, params_, zmp);
    ev.fitness = fitness(ev.report);
  } catch (const TransformError& e) {
    return structural(1.0, e.what());
  } catch (const std::exception& e) {
    return structural(2.0, e.what());
  }
  return ev;
}

JumpProblem JumpProblem::with_dt(double dt) const {
  if (!(dt > 0.0) || dt > 1e-3) throw std::invalid_argument("integration step must be in (0, 1 ms]");
  JumpProblem out = *this;
  out.options_.dt = dt;
  out.model_.dt = dt;
  return out;
}

}  // namespace omnijump
