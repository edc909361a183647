#include "omnijump/grf_profile.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace omnijump {

namespace {

constexpr int kMaxNewton = 20;
constexpr double kNewtonTol = 1e-10;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool two_phase(JumpMode m) { return m == JumpMode::Agile; }

// Grid steps at which waypoints are prescribed (t3 is handled separately).
std::vector<int> condition_steps(JumpMode mode, const TimeGrid& g) {
  if (mode == JumpMode::Agile) return {g.n1 / 2, g.n1, g.n1 + g.n2};
  return {g.n1 / 2};
}

// Waypoint (x, z, theta) triples in decision-vector order, excluding s(0).
std::vector<std::array<double, 3>> waypoint_triples(const OptVector& opt) {
  const auto& v = opt.v;
  switch (opt.mode) {
    case JumpMode::Omni: return {{v[0], v[1], v[2]}};
    case JumpMode::Agile: return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}};
    case JumpMode::Humanoid: return {{v[3], v[4], v[5]}};
  }
  return {};
}

// One translational axis of the take-off: total force is a linear combination
// of basis functions over the grid; positions respond linearly.
struct AxisSystem {
  Eigen::MatrixXd a;    // rows: conditions (waypoints then t3), cols: basis
  Eigen::VectorXd rhs;  // target minus the force-free response
};

double basis_value(int basis, int k, const TimeGrid& g) {
  const double t = g.time_at(k);
  if (basis < 2) {
    if (k >= g.n1) return 0.0;
    return basis == 0 ? 1.0 : t;
  }
  if (k < g.n1) return 0.0;
  return basis == 2 ? 1.0 : (basis == 3 ? t : t * t);
}

AxisSystem axis_system(const TimeGrid& g, const std::vector<int>& cond, int nbasis,
                       double mass, double grav, double x0, double v0, double flight,
                       const std::vector<double>& targets) {
  const int rows = static_cast<int>(cond.size()) + 1;
  AxisSystem sys{Eigen::MatrixXd::Zero(rows, nbasis), Eigen::VectorXd::Zero(rows)};
  const int n = g.steps();

  // Column -1 is the force-free response (gravity and initial state).
  for (int col = -1; col < nbasis; ++col) {
    double x = col < 0 ? x0 : 0.0;
    double v = col < 0 ? v0 : 0.0;
    std::size_t next = 0;
    for (int k = 0; k <= n; ++k) {
      while (next < cond.size() && cond[next] == k) {
        if (col < 0) sys.rhs[static_cast<int>(next)] = -x;
        else sys.a(static_cast<int>(next), col) = x;
        ++next;
      }
      if (k == n) break;
      const double acc = col < 0 ? -grav : basis_value(col, k, g) / mass;
      const double h = g.step_at(k);
      v += acc * h;
      x += v * h;
    }
    const double land = x + v * flight - (col < 0 ? 0.5 * grav * flight * flight : 0.0);
    if (col < 0) sys.rhs[rows - 1] = -land;
    else sys.a(rows - 1, col) = land;
  }
  for (int r = 0; r < rows; ++r) sys.rhs[r] += targets[static_cast<std::size_t>(r)];
  return sys;
}

struct AxisSolution {
  Eigen::VectorXd w;
  Eigen::VectorXd null;  // empty for square systems
};

AxisSolution solve_axis(const AxisSystem& sys, const char* axis) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv[0];
  const double smin = sv[sv.size() - 1];
  if (!(smax > 0.0) || smin < 1e-13 * smax)
    throw TransformError(std::string("singular translational system on axis ") + axis +
                             " (degenerate phase times)",
                         std::numeric_limits<double>::infinity());
  AxisSolution out;
  out.w = svd.solve(sys.rhs);
  if (sys.a.cols() > sys.a.rows()) out.null = svd.matrixV().col(sys.a.cols() - 1);
  return out;
}

}  // namespace

const char* mode_name(JumpMode m) {
  switch (m) {
    case JumpMode::Omni: return "omni";
    case JumpMode::Agile: return "agile";
    case JumpMode::Humanoid: return "humanoid";
  }
  return "?";
}

JumpMode parse_mode(const std::string& s) {
  if (s == "omni") return JumpMode::Omni;
  if (s == "agile") return JumpMode::Agile;
  if (s == "humanoid") return JumpMode::Humanoid;
  throw std::invalid_argument("unknown mode '" + s + "' (expected omni, agile or humanoid)");
}

std::vector<double> GRFProfile::flat() const {
  std::vector<double> out;
  const int n = channels();
  for (const auto* arr : {&a0, &a1, &b0, &b1, &b2})
    for (int c = 0; c < n; ++c) out.push_back((*arr)[static_cast<std::size_t>(c)]);
  return out;
}

std::array<double, 4> eval_u(const GRFProfile& p, const PhaseTimes& times, double t, Side side) {
  if (!(t >= 0.0 && t <= times.t3)) throw std::out_of_range("eval_u: t outside [0, t3]");
  std::array<double, 4> u{};
  const bool linear = side == Side::Left ? t <= times.t1 : t < times.t1;
  if (linear) {
    for (std::size_t c = 0; c < 4; ++c) u[c] = p.a1[c] * t + p.a0[c];
    return u;
  }
  const bool quad = side == Side::Left ? t < times.t2 : (t < times.t2 || t == times.t1);
  if (p.gamma == 0 || !quad) return u;
  for (std::size_t c = 0; c < 4; ++c) u[c] = p.b2[c] * t * t + p.b1[c] * t + p.b0[c];
  return u;
}

std::size_t OptVector::dimension(JumpMode m) {
  switch (m) {
    case JumpMode::Omni: return 5;
    case JumpMode::Agile: return 12;
    case JumpMode::Humanoid: return 8;
  }
  return 0;
}

PhaseTimes OptVector::times() const {
  if (v.size() != dimension(mode)) throw std::invalid_argument("OptVector: wrong dimension");
  switch (mode) {
    case JumpMode::Omni: return {v[3], v[3], v[4]};
    case JumpMode::Agile: return {v[9], v[10], v[11]};
    case JumpMode::Humanoid: return {v[6], v[6], v[7]};
  }
  return {};
}

bool OptVector::finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

OptVector embed_omni_in_agile(const OptVector& omni) {
  if (omni.mode != JumpMode::Omni || omni.v.size() != 5)
    throw std::invalid_argument("embed_omni_in_agile: expects an omni vector");
  OptVector out{JumpMode::Agile, std::vector<double>(12, 0.0)};
  for (int i = 0; i < 3; ++i) out.v[static_cast<std::size_t>(i)] = omni.v[static_cast<std::size_t>(i)];
  out.v[9] = omni.v[3];
  out.v[10] = omni.v[3];
  out.v[11] = omni.v[4];
  return out;
}

double TimeGrid::time_at(int k) const {
  if (k <= n1) return k * h1;
  return n1 * h1 + (k - n1) * h2;
}

TimeGrid make_grid(const PhaseTimes& times, double dt, bool two) {
  if (!(dt > 0.0)) throw std::invalid_argument("make_grid: dt must be > 0");
  if (!(times.t1 >= dt)) throw std::invalid_argument("make_grid: phase 1 shorter than dt");
  TimeGrid g;
  g.n1 = 2 * static_cast<int>(std::ceil(times.t1 / (2.0 * dt) - 1e-9));
  g.h1 = times.t1 / g.n1;
  if (two) {
    const double d2 = times.t2 - times.t1;
    if (!(d2 >= dt * (1.0 - 1e-9)))
      throw std::invalid_argument("make_grid: phase 2 shorter than dt");
    g.n2 = static_cast<int>(std::ceil(d2 / dt - 1e-9));
    g.h2 = d2 / g.n2;
  }
  return g;
}

PlanarLoad planar_load(const std::array<double, 4>& u, const PlanarJumpModel& model) {
  PlanarLoad load;
  if (model.mode == JumpMode::Humanoid) {
    load.add({0.0, 0.0, u[0], u[1]});
    load.couple = u[2];
  } else {
    load.add({model.s_j1, 0.0, u[0], u[2]});
    load.add({model.s_j2, 0.0, u[1], u[3]});
  }
  return load;
}

ProfileRollout rollout_profile(const GRFProfile& p, const PhaseTimes& times,
                               const PlanarJumpModel& model, const PlanarState& start) {
  ProfileRollout out;
  out.grid = make_grid(times, model.dt, two_phase(model.mode) && p.gamma == 1);
  const TimeGrid& g = out.grid;
  out.u.resize(static_cast<std::size_t>(g.steps()));
  std::vector<PlanarLoad> loads(static_cast<std::size_t>(g.steps()));
  for (int k = 0; k < g.steps(); ++k) {
    const double t = g.time_at(k);
    auto& u = out.u[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < 4; ++c)
      u[c] = k < g.n1 ? p.a0[c] + p.a1[c] * t : p.gamma * (p.b0[c] + p.b1[c] * t + p.b2[c] * t * t);
    loads[static_cast<std::size_t>(k)] = planar_load(u, model);
  }
  out.states = planar_rollout(start, std::span(loads).first(static_cast<std::size_t>(g.n1)),
                              model.body, g.h1);
  if (g.n2 > 0) {
    auto tail = planar_rollout(out.states.back(),
                               std::span(loads).subspan(static_cast<std::size_t>(g.n1)),
                               model.body, g.h2);
    out.states.insert(out.states.end(), tail.begin() + 1, tail.end());
  }
  return out;
}

PlanarState ballistic_target(const PlanarState& s, double flight, double g) {
  if (!(flight > 0.0)) throw std::invalid_argument("ballistic_target: flight must be > 0");
  PlanarState out = s;
  out.x = s.x + s.vx * flight;
  out.z = s.z + s.vz * flight - 0.5 * g * flight * flight;
  out.vz = s.vz - g * flight;
  out.theta = s.theta + s.omega * flight;
  return out;
}

PlanarState start_state(const OptVector& opt, const PlanarJumpModel& model) {
  if (opt.mode != JumpMode::Humanoid) return model.start;
  PlanarState s;
  s.x = opt.v[0];
  s.z = opt.v[1];
  s.theta = opt.v[2];
  return s;
}

TransformResult waypoints_to_profile(const OptVector& opt, const PlanarJumpModel& model) {
  if (opt.mode != model.mode) throw std::invalid_argument("waypoints_to_profile: mode mismatch");
  if (opt.v.size() != OptVector::dimension(opt.mode) || !opt.finite())
    throw TransformError("decision vector has wrong size or non-finite entries",
                         std::numeric_limits<double>::infinity());
  const PhaseTimes times = opt.times();
  if (!times.valid() || (two_phase(opt.mode) && !(times.t2 > times.t1)))
    throw TransformError("phase times out of order", std::numeric_limits<double>::infinity());

  TimeGrid grid;
  try {
    grid = make_grid(times, model.dt, two_phase(opt.mode));
  } catch (const std::invalid_argument& e) {
    throw TransformError(e.what(), std::numeric_limits<double>::infinity());
  }
  const std::vector<int> cond = condition_steps(opt.mode, grid);
  const auto wp = waypoint_triples(opt);
  const PlanarState start = start_state(opt, model);
  const double flight = times.t3 - times.t2;
  const double m = model.body.mass;
  const double g = model.body.gravity;

  std::vector<double> tx, tz, tth;
  for (const auto& w : wp) {
    tx.push_back(w[0]);
    tz.push_back(w[1]);
    tth.push_back(w[2]);
  }
  tx.push_back(start.x + model.landing.x);
  tz.push_back(model.landing.z);
  tth.push_back(model.landing.theta);

  const int nbasis = two_phase(opt.mode) ? 5 : 2;
  const AxisSolution sx =
      solve_axis(axis_system(grid, cond, nbasis, m, 0.0, start.x, start.vx, flight, tx), "J");
  const AxisSolution sz =
      solve_axis(axis_system(grid, cond, nbasis, m, g, start.z, start.vz, flight, tz), "z");

  const bool agile = opt.mode == JumpMode::Agile;
  const int nrot = agile ? 4 : 2;

  auto build = [&](const Eigen::VectorXd& r) {
    GRFProfile p;
    p.mode = opt.mode;
    p.gamma = agile ? 1 : 0;
    Eigen::VectorXd wx = sx.w;
    Eigen::VectorXd wz = sz.w;
    if (agile) {
      wx += r[2] * sx.null;
      wz += r[3] * sz.null;
    }
    if (opt.mode == JumpMode::Humanoid) {
      p.a0 = {wx[0], wz[0], r[0], 0.0};
      p.a1 = {wx[1], wz[1], r[1], 0.0};
      return p;
    }
    p.a0 = {wx[0] / 2, wx[0] / 2, (wz[0] + r[0]) / 2, (wz[0] - r[0]) / 2};
    p.a1 = {wx[1] / 2, wx[1] / 2, (wz[1] + r[1]) / 2, (wz[1] - r[1]) / 2};
    if (agile) {
      const std::size_t jc = model.phase2_edge == 1 ? 0 : 1;
      p.b0[jc] = wx[2];
      p.b1[jc] = wx[3];
      p.b2[jc] = wx[4];
      p.b0[jc + 2] = wz[2];
      p.b1[jc + 2] = wz[3];
      p.b2[jc + 2] = wz[4];
    }
    return p;
  };

  auto residual = [&](const Eigen::VectorXd& r) {
    const ProfileRollout ro = rollout_profile(build(r), times, model, start);
    Eigen::VectorXd res(static_cast<int>(tth.size()));
    for (std::size_t i = 0; i < cond.size(); ++i)
      res[static_cast<int>(i)] = ro.states[static_cast<std::size_t>(cond[i])].theta - tth[i];
    const PlanarState& lift = ro.states.back();
    res[static_cast<int>(cond.size())] = lift.theta + lift.omega * flight - tth.back();
    return res;
  };

  Eigen::VectorXd r = Eigen::VectorXd::Zero(nrot);
  Eigen::VectorXd res = residual(r);
  double norm = res.lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < kMaxNewton && norm > kNewtonTol; ++it) {
    Eigen::MatrixXd jac(res.size(), nrot);
    for (int i = 0; i < nrot; ++i) {
      const double h = 1e-2 * std::max(1.0, std::abs(r[i]));
      Eigen::VectorXd rp = r;
      Eigen::VectorXd rm = r;
      rp[i] += h;
      rm[i] -= h;
      jac.col(i) = (residual(rp) - residual(rm)) / (2.0 * h);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
    if (qr.rank() < nrot)
      throw TransformError("pitch conditions are not controllable (rank-deficient Jacobian)", norm);
    const Eigen::VectorXd step = qr.solve(-res);
    double lambda = 1.0;
    Eigen::VectorXd trial = r + step;
    Eigen::VectorXd trial_res = residual(trial);
    while (!(trial_res.lpNorm<Eigen::Infinity>() < norm) && lambda > 1e-4) {
      lambda *= 0.5;
      trial = r + lambda * step;
      trial_res = residual(trial);
    }
    if (!(trial_res.lpNorm<Eigen::Infinity>() < norm)) break;
    r = trial;
    res = trial_res;
    norm = res.lpNorm<Eigen::Infinity>();
  }
  if (!(norm <= kNewtonTol))
    throw TransformError("pitch waypoint iteration did not converge, residual " + fmt17(norm) +
                             " rad",
                         norm);

  TransformResult out;
  out.profile = build(r);
  out.times = times;
  out.newton_iterations = it;
  out.residual = norm;
  return out;
}

OptVector profile_to_waypoints(const GRFProfile& profile, const PhaseTimes& times,
                               const PlanarJumpModel& model, const PlanarState& start) {
  const ProfileRollout ro = rollout_profile(profile, times, model, start);
  const std::vector<int> cond = condition_steps(model.mode, ro.grid);
  OptVector out{model.mode, {}};
  if (model.mode == JumpMode::Humanoid) out.v = {start.x, start.z, start.theta};
  for (int k : cond) {
    const PlanarState& s = ro.states[static_cast<std::size_t>(k)];
    out.v.insert(out.v.end(), {s.x, s.z, s.theta});
  }
  if (model.mode == JumpMode::Agile) out.v.insert(out.v.end(), {times.t1, times.t2, times.t3});
  else out.v.insert(out.v.end(), {times.t1, times.t3});
  return out;
}

std::string profile_to_text(const GRFProfile& p, const PhaseTimes& times) {
  std::string out = std::string("profile ") + mode_name(p.mode) + " " + std::to_string(p.gamma) +
                    " " + fmt17(times.t1) + " " + fmt17(times.t2) + " " + fmt17(times.t3) + "\n";
  for (std::size_t c = 0; c < static_cast<std::size_t>(p.channels()); ++c)
    out += fmt17(p.a0[c]) + " " + fmt17(p.a1[c]) + " " + fmt17(p.b0[c]) + " " + fmt17(p.b1[c]) +
           " " + fmt17(p.b2[c]) + "\n";
  return out;
}

std::pair<GRFProfile, PhaseTimes> profile_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag, mode;
  GRFProfile p;
  PhaseTimes t;
  if (!(in >> tag >> mode >> p.gamma >> t.t1 >> t.t2 >> t.t3) || tag != "profile")
    throw std::invalid_argument("profile_from_text: bad header");
  p.mode = parse_mode(mode);
  for (std::size_t c = 0; c < static_cast<std::size_t>(p.channels()); ++c)
    if (!(in >> p.a0[c] >> p.a1[c] >> p.b0[c] >> p.b1[c] >> p.b2[c]))
      throw std::invalid_argument("profile_from_text: channel " + std::to_string(c) +
                                  " is incomplete");
  return {p, t};
}

}  // namespace omnijump
