// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Usage: omnijump_acceptance [criterion ...]   (no arguments runs all of them)

#include <omnijump/bench.hpp>
#include <omnijump/jump_plane.hpp>
#include <omnijump/jump_sim.hpp>
#include <omnijump/leg_kinematics.hpp>
#include <omnijump/otp_de.hpp>
#include <omnijump/reloc.hpp>
#include <omnijump/rng.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace omnijump;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Feasible omnidirectional solves at two fixed targets.
Outcome feasible_solves() {
  constexpr int kSeeds = 20, kNeeded = 18;
  constexpr double kWallLimit = 10.0;  // s per solve
  const std::array<Eigen::Vector3d, 2> targets{Eigen::Vector3d(1.0, 0, 0.25), Eigen::Vector3d(-0.7, -0.4, 0.5)};
  bool pass = true;
  std::string detail;
  for (const auto& p : targets) {
    JumpTarget t;
    t.p = p;
    const JumpProblem pr(mini_cheetah_params(), t, {});
    int ok = 0;
    double worst_wall = 0.0, worst_error = 0.0;
    for (int s = 1; s <= kSeeds; ++s) {
      DEConfig c = DEConfig::cold();
      c.seed = static_cast<std::uint64_t>(s);
      const OptimizeResult r = optimize(pr, c);
      worst_wall = std::max(worst_wall, r.wall_time);
      if (r.success && r.wall_time < kWallLimit) ++ok;
      if (r.feasible) worst_error = std::max(worst_error, r.landing_error);
    }
    pass = pass && ok >= kNeeded;
    detail += fmt("[%.2f %.2f %.2f] %d/%d (need %d), max wall %.2fs, max landing error %.4f m; ", p.x(), p.y(),
                  p.z(), ok, kSeeds, kNeeded, worst_wall, worst_error);
  }
  return {pass, detail};
}

// 2 and 3 share the grid run: the library for the paired run is its seed-0 feasible solves.
struct GridRun {
  std::vector<SolveRecord> records;
  double wall = 0.0;
};

const GridRun& range1_grid() {
  static const GridRun run = [] {
    GridBenchOptions o;
    o.boxes = reference_range(1);
    o.stride = 5;
    o.config.seed = 1;
    const auto t0 = std::chrono::steady_clock::now();
    GridRun g;
    g.records = run_grid(mini_cheetah_params(), o);
    g.wall = seconds_since(t0);
    return g;
  }();
  return run;
}

Outcome success_rate() {
  constexpr double kRate = 0.90, kWallLimit = 30 * 60.0;
  const GridRun& g = range1_grid();
  bool pass = g.wall < kWallLimit && !g.records.empty();
  std::string detail = fmt("%zu targets in %.0f s (limit %.0f s); ", g.records.size(), g.wall, kWallLimit);
  for (const auto& s : summarize(g.records)) {
    const double rate = s.attempted ? static_cast<double>(s.succeeded) / s.attempted : 0.0;
    pass = pass && rate >= kRate;
    detail += fmt("%s %d/%d; ", direction_name(s.direction), s.succeeded, s.attempted);
  }
  return {pass, detail};
}

Outcome warm_speedup() {
  constexpr int kPairs = 50;
  constexpr double kRatio = 0.5;
  const PreMotionLibrary lib = library_from_records(range1_grid().records);
  if (lib.size() == 0) return {false, "library is empty"};
  PairedOptions o;
  o.count = kPairs;
  const auto paired = run_paired(mini_cheetah_params(), lib, o);
  std::vector<double> cold, warm;
  int cold_ok = 0, warm_ok = 0;
  for (const auto& p : paired) {
    cold.push_back(generations_to_feasibility(p.cold));
    warm.push_back(generations_to_feasibility(p.warm));
    cold_ok += p.cold.feasible;
    warm_ok += p.warm.feasible;
  }
  const double mc = median(cold), mw = median(warm);
  const bool pass = static_cast<int>(paired.size()) == kPairs && mw <= kRatio * mc;
  return {pass, fmt("%zu pairs over %zu library entries; median generations to feasible cold %.1f, warm %.1f "
                    "(ratio %.3f, need <= %.2f); feasible cold %d, warm %d",
                    paired.size(), lib.size(), mc, mw, mc > 0 ? mw / mc : 0.0, kRatio, cold_ok, warm_ok)};
}

// 4. A priority-n violation against any set of violations at priorities <= n - 2.
Outcome penalty_hierarchy() {
  constexpr int kCases = 100000;
  constexpr double kSigmaMax = 1e6;
  std::vector<ConstraintKind> kinds;
  for (std::size_t i = 0; i < kConstraintCount; ++i) kinds.push_back(static_cast<ConstraintKind>(i));

  // Sigma log-uniform over [1e-6, sigma_max] so both tails are exercised.
  auto draw = [&](Rng& rng, double hi) { return std::exp(rng.uniform(std::log(1e-6), std::log(hi))); };
  auto run = [&](double hi, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0, tried = 0;
    while (tried < kCases) {
      const ConstraintKind top = kinds[rng.below(kinds.size())];
      std::vector<ConstraintKind> low;
      for (auto k : kinds)
        if (priority(k) <= priority(top) - 2) low.push_back(k);
      if (low.empty()) continue;
      ++tried;
      ConstraintReport a, b;
      a.energy = b.energy = rng.uniform(0, 1000);
      a.set(top, draw(rng, hi));
      for (auto k : low)
        if (rng.uniform() < 0.5 || k == low.front()) b.set(k, draw(rng, hi));
      if (!(fitness(a) > fitness(b))) ++bad;
    }
    return bad;
  };
  const int bad = run(kSigmaMax, 4);
  // Largest uniform sigma bound under which the ordering provably holds: the
  // worst case is a 1e-300 top violation against every lower constraint at the bound.
  double lo = 0.0, hi = kSigmaMax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    bool holds = true;
    for (auto top : kinds) {
      ConstraintReport a, b;
      a.set(top, 1e-300);
      bool any = false;
      for (auto k : kinds)
        if (priority(k) <= priority(top) - 2) {
          b.set(k, mid);
          any = true;
        }
      if (any && !(fitness(a) > fitness(b))) holds = false;
    }
    (holds ? lo : hi) = mid;
  }
  const int bad_bounded = run(lo * 0.999, 5);
  return {bad == 0, fmt("%d counterexamples in %d cases with sigma <= %.0e; the ordering holds for sigma <= %.1f "
                        "(%d counterexamples there)",
                        bad, kCases, kSigmaMax, lo, bad_bounded)};
}

// 5. Plane decomposition over random stances, headings and resultants.
Outcome plane_properties() {
  constexpr int kDraws = 10000;
  constexpr double kTol = 1e-9;
  Rng rng(55);
  double worst_force = 0, worst_torque = 0, worst_jump = 0;
  for (int k = 0; k < kDraws; ++k) {
    const double h = rng.uniform(0.1, 0.35);
    const Eigen::Vector3d f1(rng.uniform(0.1, 0.3), rng.uniform(0.05, 0.2), -h);
    const Eigen::Vector3d f2(rng.uniform(0.1, 0.3), -rng.uniform(0.05, 0.2), -h);
    const std::vector<Eigen::Vector3d> feet{f1, f2, Eigen::Vector3d(-f2.x(), -f2.y(), -h),
                                            Eigen::Vector3d(-f1.x(), -f1.y(), -h)};
    const ResultantForces u{rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(0, 150), rng.uniform(0, 150)};
    const JumpPlaneSpec s = build_plane_at(rng.uniform(0, 2 * std::numbers::pi), feet);
    const auto f = decompose(u, s, feet);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& fi : f) sum += fi;
    const Eigen::Vector3d want = (u.u_j1 + u.u_j2) * s.axis_j + Eigen::Vector3d(0, 0, u.u_z1 + u.u_z2);
    worst_force = std::max(worst_force, (sum - want).norm());
    // Torque about the CoM from first principles.
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    for (int i = 0; i < 4; ++i) t += feet[static_cast<std::size_t>(i)].cross(f[static_cast<std::size_t>(i)]);
    worst_torque = std::max({worst_torque, std::abs(t.dot(s.axis_j)), std::abs(t.z())});
    // Continuity across every sector boundary of this stance.
    if (k % 10 == 0)
      for (const auto& ft : feet) {
        const double b = azimuth(ft.x(), ft.y());
        const auto lo = decompose(u, build_plane_at(b - 1e-13, feet), feet);
        const auto hi = decompose(u, build_plane_at(b + 1e-13, feet), feet);
        for (int j = 0; j < 4; ++j)
          worst_jump = std::max(worst_jump, (lo[static_cast<std::size_t>(j)] - hi[static_cast<std::size_t>(j)]).norm());
      }
  }
  const bool pass = worst_force < kTol && worst_torque < kTol && worst_jump < kTol;
  return {pass, fmt("%d draws: max force error %.2e N, max in-plane torque %.2e Nm, max boundary jump %.2e N "
                    "(tolerance %.0e)",
                    kDraws, worst_force, worst_torque, worst_jump, kTol)};
}

// 6. Profile -> waypoints -> profile on random profiles with a reachable landing.
Outcome transform_round_trip() {
  constexpr int kProfiles = 100;
  constexpr double kTol = 1e-6;
  const RobotParams p = mini_cheetah_params();
  const double w = p.mass * p.gravity;
  Rng rng(66);
  double worst = 0.0;
  int done = 0;
  for (int k = 0; k < kProfiles; ++k) {
    PlanarJumpModel m;
    m.mode = JumpMode::Omni;
    m.body = {p.mass, p.inertia_diag.y(), p.gravity};
    m.dt = 1e-3;
    m.s_j1 = rng.uniform(0.1, 0.25);
    m.s_j2 = -rng.uniform(0.1, 0.25);
    m.start.z = p.stand_height;
    const double t1 = rng.uniform(0.12, 0.28);
    const PhaseTimes times{t1, t1, t1 + rng.uniform(0.15, 0.5)};
    const double wx0 = rng.uniform(-40, 40), wx1 = rng.uniform(-150, 150);
    const double wz0 = rng.uniform(1.2, 2.5) * w, wz1 = rng.uniform(-200, 200);
    const double r0 = rng.uniform(-10, 10), r1 = rng.uniform(-40, 40);
    GRFProfile g;
    g.mode = JumpMode::Omni;
    g.a0 = {wx0 / 2, wx0 / 2, (wz0 + r0) / 2, (wz0 - r0) / 2};
    g.a1 = {wx1 / 2, wx1 / 2, (wz1 + r1) / 2, (wz1 - r1) / 2};
    const ProfileRollout ro = rollout_profile(g, times, m, m.start);
    m.landing = ballistic_target(ro.states.back(), times.t3 - times.t2, m.body.gravity);
    const OptVector wp = profile_to_waypoints(g, times, m, m.start);
    const TransformResult back = waypoints_to_profile(wp, m);
    const auto a = g.flat();
    const auto b = back.profile.flat();
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    ++done;
  }
  return {done == kProfiles && worst < kTol,
          fmt("%d profiles, max coefficient error %.2e (tolerance %.0e)", done, worst, kTol)};
}

// 7. Leg kinematics.
Outcome kinematics() {
  constexpr int kSamples = 1000;
  constexpr double kFkTol = 1e-9, kJacTol = 1e-6;
  const RobotParams p = mini_cheetah_params();
  Rng rng(77);
  double worst_fk = 0, worst_jac = 0;
  for (int k = 0; k < kSamples; ++k) {
    const LegSide s(1 + static_cast<int>(rng.below(4)));
    const JointVector q(rng.uniform(-0.6, 0.6), rng.uniform(-1.4, 1.4), rng.uniform(0.2, 2.9));
    const Eigen::Vector3d f = fk(q, s, p);
    worst_fk = std::max(worst_fk, (fk(ik(f, s, p), s, p) - f).norm());
    const Eigen::Matrix3d j = jacobian(q, s, p);
    for (int c = 0; c < 3; ++c) {
      JointVector a = q, b = q;
      a[c] += 1e-6;
      b[c] -= 1e-6;
      worst_jac = std::max(worst_jac, ((fk(a, s, p) - fk(b, s, p)) / 2e-6 - j.col(c)).norm());
    }
  }
  return {worst_fk < kFkTol && worst_jac < kJacTol,
          fmt("%d samples: max round-trip error %.2e m (tol %.0e), max Jacobian error %.2e (tol %.0e)", kSamples,
              worst_fk, kFkTol, worst_jac, kJacTol)};
}

// 8. Branch and bound on synthetic maps.
Outcome bnb_correctness() {
  constexpr int kMaps = 20, kSandwich = 10000;
  constexpr double kThetaTol = 1 * kDeg, kXyTol = 0.02;
  int recovered = 0, sandwich_bad = 0, brute_bad = 0, brute_checked = 0;
  double worst_theta = 0, worst_xy = 0;
  std::string planes;
  for (int m = 0; m < kMaps; ++m) {
    SceneOptions o;
    o.points = 300;
    o.outlier_fraction = 0.3 * m / (kMaps - 1);
    o.min_walls = 4;
    o.max_walls = 14;
    const SyntheticScene s = synthetic_scene(800 + static_cast<std::uint64_t>(m), o);
    BnbConfig c;
    c.z = s.z;
    const BnbResult r = bnb_search(s.points, s.map, c);
    const double dth = std::abs(std::remainder(r.best.theta - s.truth.theta, 2 * std::numbers::pi));
    const double dxy = std::max(std::abs(r.best.x - s.truth.x), std::abs(r.best.y - s.truth.y));
    worst_theta = std::max(worst_theta, dth);
    worst_xy = std::max(worst_xy, dxy);
    if (dth <= kThetaTol && dxy <= kXyTol) ++recovered;
    planes += std::to_string(s.map.patches.size()) + (m + 1 < kMaps ? "," : "");

    Rng rng(900 + static_cast<std::uint64_t>(m));
    for (int k = 0; k < kSandwich / kMaps; ++k) {
      SearchBox box;
      box.center = {rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      box.half = {rng.uniform(0, 0.6), rng.uniform(0, 0.6), rng.uniform(0, 0.6)};
      if (k % 4 == 0) box.center = {s.truth.theta, s.truth.x, s.truth.y};  // boxes around the optimum
      const Bounds bd = box_bounds(box, s.points, s.map, c.eps, s.z);
      const PoseHypothesis b{box.center[0] + rng.uniform(-1, 1) * box.half[0],
                             box.center[1] + rng.uniform(-1, 1) * box.half[1],
                             box.center[2] + rng.uniform(-1, 1) * box.half[2]};
      const int e = consensus(b, s.points, s.map, c.eps, s.z);
      const int centre = consensus({box.center[0], box.center[1], box.center[2]}, s.points, s.map, c.eps, s.z);
      if (e > bd.upper || bd.lower != centre || bd.lower > bd.upper) ++sandwich_bad;
      if (k % 10 == 0) {
        ++brute_checked;
        if (e != consensus_brute(b, s.points, s.map, c.eps, s.z)) ++brute_bad;
      }
    }
  }
  const bool pass = recovered == kMaps && sandwich_bad == 0 && brute_bad == 0;
  return {pass, fmt("%d/%d poses within %.0f deg / %.2f m (worst %.3f deg, %.4f m; planes per map %s); sandwich "
                    "violations %d/%d; brute-force mismatches %d/%d",
                    recovered, kMaps, kThetaTol / kDeg, kXyTol, worst_theta / kDeg, worst_xy, planes.c_str(),
                    sandwich_bad, kSandwich, brute_bad, brute_checked)};
}

// 9. Refinement accuracy against the noise floor.
Outcome refinement() {
  constexpr int kTrials = 100;
  constexpr double kNoise = 0.005, kFactor = 3.0;
  double se_t = 0, se_r = 0, floor_t = 0, floor_r = 0;
  int monotone = 0, failed = 0, worst_trial_over = 0;
  for (int k = 0; k < kTrials; ++k) {
    SceneOptions o;
    o.points = 600;
    o.noise = kNoise;
    const SyntheticScene s = synthetic_scene(2000 + static_cast<std::uint64_t>(k), o);
    const Pose6 truth = Pose6::from_hypothesis(s.truth, s.z);
    Rng rng(3000 + static_cast<std::uint64_t>(k));
    Pose6 seed = truth;
    seed.t += Eigen::Vector3d(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02));
    seed.r = Eigen::AngleAxisd(rng.uniform(-1, 1) * kDeg,
                               Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized())
                 .toRotationMatrix() *
             seed.r;
    try {
      const RefineResult r = refine_pose(seed, s.points, s.map);
      bool mono = true;
      for (std::size_t i = 1; i < r.cost_history.size(); ++i) mono = mono && r.cost_history[i] <= r.cost_history[i - 1];
      monotone += mono;
      const NoiseFloor f = noise_floor(truth, s.points, s.map, kNoise);
      const double et = (r.pose.t - truth.t).norm();
      const double er = rotation_distance(r.pose.r, truth.r);
      se_t += et * et;
      se_r += er * er;
      floor_t += f.translation * f.translation;
      floor_r += f.rotation * f.rotation;
      if (et > kFactor * f.translation || er > kFactor * f.rotation) ++worst_trial_over;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  const int n = kTrials - failed;
  const double rms_t = std::sqrt(se_t / std::max(n, 1)), rms_r = std::sqrt(se_r / std::max(n, 1));
  const double fl_t = std::sqrt(floor_t / std::max(n, 1)), fl_r = std::sqrt(floor_r / std::max(n, 1));
  const bool pass = failed == 0 && monotone == kTrials && rms_t <= kFactor * fl_t && rms_r <= kFactor * fl_r;
  return {pass, fmt("%d trials at %.0f mm noise: RMS error %.3f mm vs floor %.3f mm, %.4f deg vs floor %.4f deg "
                    "(limit %.0fx); single trials over the limit %d; monotone %d/%d; failed %d",
                    kTrials, kNoise * 1e3, rms_t * 1e3, fl_t * 1e3, rms_r / kDeg, fl_r / kDeg, kFactor,
                    worst_trial_over, monotone, kTrials, failed)};
}

// 10. Humanoid forward jump.
Outcome humanoid() {
  constexpr double kDistance = 1.0, kToe = 0.180, kHeel = 0.120;
  const RobotParams h = humanoid_params();
  ProblemOptions o;
  o.mode = JumpMode::Humanoid;
  JumpTarget t;
  t.p = {1.2, 0, 0.78};
  const JumpProblem pr(h, t, o);
  for (int seed = 1; seed <= 10; ++seed) {
    DEConfig c = DEConfig::cold();
    c.seed = static_cast<std::uint64_t>(seed);
    const OptimizeResult r = optimize(pr, c);
    if (!r.feasible) continue;
    const HumanoidOutcome out = simulate_humanoid(r.best, pr, o.dt);
    bool zmp_in = !out.zmp.empty();
    double zlo = 1e9, zhi = -1e9;
    for (const auto& z : out.zmp) {
      zmp_in = zmp_in && z.zmp > -kHeel && z.zmp < kToe;
      zlo = std::min(zlo, z.zmp);
      zhi = std::max(zhi, z.zmp);
    }
    bool torque_ok = true;
    for (int j = 0; j < 3; ++j) torque_ok = torque_ok && out.peak_torque[j] <= h.torque_limits[static_cast<std::size_t>(j)];
    const bool pass = out.flight_distance >= kDistance && zmp_in && torque_ok;
    return {pass, fmt("seed %d converged: distance %.3f m (need >= %.1f), ZMP in [%.3f, %.3f] m within (-%.3f, %.3f), "
                      "peak |tau| hip %.0f knee %.0f ankle %.0f Nm vs %.0f/%.0f/%.0f",
                      seed, out.flight_distance, kDistance, zlo, zhi, kHeel, kToe, out.peak_torque[0],
                      out.peak_torque[1], out.peak_torque[2], h.torque_limits[0], h.torque_limits[1],
                      h.torque_limits[2])};
  }
  return {false, "no converged solve in seeds 1-10"};
}

// 11. CLI determinism across repeated runs and worker counts.
#ifdef JUMPOPT_EXE
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name == "timing.txt" || (name.size() > 11 && name.substr(name.size() - 11) == "_timing.csv")) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = s.str();
  }
  return out;
}

int run(const std::string& args) {
  const std::string cmd = std::string(JUMPOPT_EXE) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "omnijump_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string r = root.string();
  // Each case: label and argument list with {out} and {w} placeholders.
  const std::vector<std::pair<std::string, std::string>> cases{
      {"optimize", "optimize --target 0.5 0.1 0.3 --seed 3 --maxgen 60 --workers {w} --out {out}"},
      {"simulate", "simulate --solution " + r + "/base/solution.txt --out {out}"},
      {"bench", "bench --grid 0.4 0 0.3 0.5 0.05 0.3 --paired 2 --seed 2 --maxgen 40 --workers {w} --out {out}"},
      {"premotion build", "premotion build --grid 0.4 0 0.3 0.5 0 0.3 --seed 2 --maxgen 40 --workers {w} --out {out}"},
      {"reloc synth", "reloc synth --seed 5 --points 300 --outliers 0.1 --noise 0.005 --out {out}"},
      {"reloc solve", "reloc solve --map " + r + "/scene/map.txt --points " + r + "/scene/points.txt --out {out}"},
  };
  if (run("optimize --target 0.5 0.1 0.3 --seed 3 --maxgen 60 --out " + r + "/base") != 0 &&
      !fs::exists(root / "base" / "solution.txt"))
    return {false, "could not produce the base solution"};
  if (run("reloc synth --seed 5 --points 300 --outliers 0.1 --noise 0.005 --out " + r + "/scene") != 0)
    return {false, "could not synthesise the reloc scene"};

  auto expand = [](std::string s, const std::string& out, int w) {
    auto put = [&](const std::string& key, const std::string& v) {
      for (std::size_t at; (at = s.find(key)) != std::string::npos;) s.replace(at, key.size(), v);
    };
    put("{out}", out);
    put("{w}", std::to_string(w));
    return s;
  };
  bool pass = true;
  std::string detail;
  int index = 0;
  for (const auto& [label, args] : cases) {
    const std::string a = r + "/c" + std::to_string(index) + "a";
    const std::string b = r + "/c" + std::to_string(index) + "b";
    const std::string c = r + "/c" + std::to_string(index) + "c";
    ++index;
    const int ra = run(expand(args, a, 1));
    const int rb = run(expand(args, b, 1));
    const int rc = run(expand(args, c, 3));
    const auto sa = snapshot(a), sb = snapshot(b), sc = snapshot(c);
    const bool same = ra == rb && ra == rc && !sa.empty() && sa == sb && sa == sc;
    pass = pass && same;
    detail += fmt("%s %s (%zu files, exit %d); ", label.c_str(), same ? "identical" : "DIFFERENT", sa.size(), ra);
  }
  // Read-only commands print to stdout; compare that too.
  const std::string lib = r + "/c3a";
  for (const std::string args : {"premotion stats --library " + lib, "premotion lookup --library " + lib +
                                                                          " --target 0.42 0 0.3"}) {
    const std::string o1 = r + "/stdout1", o2 = r + "/stdout2";
    const int e1 = std::system((std::string(JUMPOPT_EXE) + " " + args + " > " + o1 + " 2>&1").c_str());
    const int e2 = std::system((std::string(JUMPOPT_EXE) + " " + args + " > " + o2 + " 2>&1").c_str());
    std::ifstream i1(o1), i2(o2);
    std::stringstream s1, s2;
    s1 << i1.rdbuf();
    s2 << i2.rdbuf();
    const bool same = e1 == e2 && s1.str() == s2.str() && !s1.str().empty();
    pass = pass && same;
    detail += fmt("%s %s; ", args.substr(0, args.find(" --")).c_str(), same ? "identical" : "DIFFERENT");
  }
  fs::remove_all(root);
  return {pass, detail};
}
#else
Outcome cli_determinism() { return {false, "jumpopt was not built"}; }
#endif

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"feasible omnidirectional solves", feasible_solves},
      {"success rate by direction", success_rate},
      {"warm-start speedup", warm_speedup},
      {"penalty hierarchy", penalty_hierarchy},
      {"jumping-plane properties", plane_properties},
      {"transform round trip", transform_round_trip},
      {"leg kinematics", kinematics},
      {"branch and bound", bnb_correctness},
      {"pose refinement", refinement},
      {"humanoid jump", humanoid},
      {"CLI determinism", cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
