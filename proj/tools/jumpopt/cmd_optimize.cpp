#include "commands.hpp"

#include <omnijump/jump_sim.hpp>
#include <omnijump/otp_de.hpp>
#include <omnijump/premotion.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>

namespace jumpopt {

namespace {

using namespace omnijump;

struct ProblemArgs {
  std::vector<double> target;
  double yaw = 0.0;
  double pitch = 0.0;
  bool vertical = false;
  std::string mode = "omni";
  std::string robot;
  std::string reading = "end";
};

void add_problem_flags(CLI::App* app, ProblemArgs& a, bool target_required) {
  auto* t = app->add_option("--target", a.target, "landing CoM target x y z (m, body frame at take-off)")
                ->expected(3);
  if (target_required) t->required();
  app->add_option("--yaw", a.yaw, "landing yaw (rad)");
  app->add_option("--pitch", a.pitch, "landing pitch for agile flips (rad)");
  app->add_flag("--vertical", a.vertical, "allow a purely vertical target");
  app->add_option("--mode", a.mode, "omni, agile or humanoid")
      ->check(CLI::IsMember({"omni", "agile", "humanoid"}));
  app->add_option("--robot", a.robot,
                  "preset (mini_cheetah, cyberdog, humanoid) or config file; defaults to $" +
                      std::string(kRobotEnv));
  app->add_option("--time-reading", a.reading, "t2 cap applies to the phase end or its duration")
      ->check(CLI::IsMember({"end", "duration"}));
}

TimeReading reading_of(const std::string& s) {
  return s == "duration" ? TimeReading::PhaseDuration : TimeReading::PhaseEnd;
}

const char* reading_name(TimeReading r) {
  return r == TimeReading::PhaseDuration ? "duration" : "end";
}

JumpTarget target_of(const ProblemArgs& a) {
  JumpTarget t;
  t.p = {a.target[0], a.target[1], a.target[2]};
  t.yaw = a.yaw;
  t.pitch = a.pitch;
  t.vertical = a.vertical;
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(t.p[i])) throw CommandError(kExitUsage, "target must be finite");
  if (!std::isfinite(t.yaw) || !std::isfinite(t.pitch))
    throw CommandError(kExitUsage, "yaw and pitch must be finite");
  return t;
}

/// Constructs the problem, mapping geometric failures to exit 3.
std::unique_ptr<JumpProblem> make_problem(const RobotParams& params, const JumpTarget& target,
                                          const ProblemOptions& options) {
  if ((options.mode == JumpMode::Humanoid) != (params.platform == Platform::Humanoid))
    throw CommandError(kExitUsage, std::string("--mode ") + mode_name(options.mode) + " does not match robot " +
                                       params.name);
  try {
    return std::make_unique<JumpProblem>(params, target, options);
  } catch (const PlaneError& e) {
    throw CommandError(kExitUnreachable, std::string("jump plane: ") + e.what());
  } catch (const TargetError& e) {
    throw CommandError(kExitUnreachable, std::string("target: ") + e.what());
  } catch (const UnreachableError& e) {
    throw CommandError(kExitUnreachable, std::string("stance: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CommandError(kExitDataError, e.what());
  }
}

std::string vector_text(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + number(x);
  return s;
}

std::string trajectory_csv(const JumpTrajectory& tr) {
  const std::size_t legs = tr.samples.empty() ? 0 : tr.samples.front().legs.size();
  const bool humanoid = tr.mode == JumpMode::Humanoid;
  std::string s = humanoid ? "t,x,z,theta,vx,vz,omega,fx,fz,tau_fy" : "t,x,z,theta,vx,vz,omega,uJ1,uJ2,uz1,uz2";
  for (std::size_t l = 1; l <= legs; ++l)
    for (const char* a : {"x", "y", "z"}) s += ",f" + std::to_string(l) + a;
  for (std::size_t l = 1; l <= legs; ++l)
    for (int j = 1; j <= 3; ++j) s += ",tau" + std::to_string(l) + "_" + std::to_string(j);
  for (std::size_t l = 1; l <= legs; ++l)
    for (int j = 1; j <= 3; ++j) s += ",q" + std::to_string(l) + "_" + std::to_string(j);
  for (std::size_t l = 1; l <= legs; ++l) s += ",contact" + std::to_string(l);
  s += '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.9g", v);
    s += buf;
  };
  const std::size_t channels = humanoid ? 3 : 4;
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& smp = tr.samples[k];
    std::snprintf(buf, sizeof buf, "%.9g", smp.t);
    s += buf;
    for (double v : {smp.state.x, smp.state.z, smp.state.theta, smp.state.vx, smp.state.vz, smp.state.omega})
      put(v);
    const auto& u = k < tr.u.size() ? tr.u[k] : std::array<double, 4>{};
    for (std::size_t c = 0; c < channels; ++c) put(u[c]);
    for (const auto& leg : smp.legs)
      for (int i = 0; i < 3; ++i) put(leg.force[i]);
    for (const auto& leg : smp.legs)
      for (int i = 0; i < 3; ++i) put(leg.tau[i]);
    for (const auto& leg : smp.legs)
      for (int i = 0; i < 3; ++i) put(leg.q[i]);
    for (const auto& leg : smp.legs) s += leg.on_ground ? ",1" : ",0";
    s += '\n';
  }
  return s;
}

std::string body_csv(const SimOutcome& sim) {
  std::string s = "phase,t,px,py,pz,roll,pitch,yaw,vx,vy,vz,wx,wy,wz\n";
  char buf[320];
  auto row = [&](const char* phase, double t, const ReducedState& b) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  phase, t, b.p_com.x(), b.p_com.y(), b.p_com.z(), b.euler.x(), b.euler.y(), b.euler.z(),
                  b.v_com.x(), b.v_com.y(), b.v_com.z(), b.omega_b.x(), b.omega_b.y(), b.omega_b.z());
    s += buf;
  };
  const auto& g = sim.trajectory.grid;
  for (std::size_t k = 0; k < sim.stance.size(); ++k) row("stance", g.time_at(static_cast<int>(k)), sim.stance[k]);
  const double t2 = sim.trajectory.times.t2;
  const double flight = sim.trajectory.times.t3 - t2;
  const auto nf = static_cast<double>(sim.flight.size());
  for (std::size_t k = 0; k < sim.flight.size(); ++k)
    row("flight", t2 + flight * static_cast<double>(k + 1) / nf, sim.flight[k]);
  return s;
}

std::string sim_summary(const SimOutcome& sim) {
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf, "target_world %.9g %.9g %.9g\n", sim.target.x(), sim.target.y(), sim.target.z());
  s += buf;
  std::snprintf(buf, sizeof buf, "landing %.9g %.9g %.9g\n", sim.landing.p_com.x(), sim.landing.p_com.y(),
                sim.landing.p_com.z());
  s += buf;
  std::snprintf(buf, sizeof buf, "landing_error %.9g\nlanding_pitch %.9g\n", sim.target_error, sim.landing_pitch);
  s += buf;
  s += std::string("c_space_exit ") + (sim.c_space_exit ? "yes" : "no") + "\n";
  for (const auto& w : sim.warnings) s += "warning " + w + "\n";
  return s;
}

std::string zmp_csv(const HumanoidOutcome& h) {
  std::string s = "t,zmp,lower,upper,inside\n";
  char buf[160];
  for (const auto& z : h.zmp) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%d\n", z.t, z.zmp, z.lower, z.upper, z.feasible ? 1 : 0);
    s += buf;
  }
  return s;
}

std::string humanoid_summary(const HumanoidOutcome& h) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "flight_distance %.9g\nzmp_inside %s\nfirst_zmp_violation %.9g\npeak_torque %.9g %.9g %.9g\n"
                "peak_ground_force %.9g\n",
                h.flight_distance, h.zmp_ok ? "yes" : "no", h.first_zmp_violation, h.peak_torque.x(),
                h.peak_torque.y(), h.peak_torque.z(), h.peak_ground_force);
  return buf;
}

/// Simulates `opt` and writes body.csv (plus zmp.csv for humanoids); returns the summary text.
std::string write_simulation(const fs::path& out, const OptVector& opt, const JumpProblem& problem,
                             double dt, double* landing_error) {
  if (problem.options().mode == JumpMode::Humanoid) {
    const HumanoidOutcome h = simulate_humanoid(opt, problem, dt);
    write_artifact(out, "body.csv", body_csv(h.sim));
    write_artifact(out, "zmp.csv", zmp_csv(h));
    if (landing_error) *landing_error = h.sim.target_error;
    return sim_summary(h.sim) + humanoid_summary(h);
  }
  const SimOutcome sim = simulate_jump(opt, problem, dt);
  write_artifact(out, "body.csv", body_csv(sim));
  if (landing_error) *landing_error = sim.target_error;
  return sim_summary(sim);
}

int run_optimize(CLI::App* app, const ProblemArgs& a, const std::string& library, std::uint64_t seed,
                 int workers, int maxgen, int np, const std::string& out_dir) {
  const fs::path out(out_dir);
  ProblemOptions po;
  po.mode = parse_mode(a.mode);
  po.reading = reading_of(a.reading);
  const RobotParams params = resolve_robot(a.robot, po.mode);
  const JumpTarget target = target_of(a);

  std::optional<PreMotionLibrary> lib;
  if (!library.empty()) {
    try {
      lib = PreMotionLibrary::load(library);
    } catch (const LibraryError& e) {
      throw CommandError(kExitDataError, e.what());
    }
  }

  Manifest m;
  m.set("command", std::string("optimize"));
  m.set("config_digest", hex64(fnv1a64(option_digest_text(*app) + robot_to_config(params))));
  m.set("seed", static_cast<long long>(seed));

  const auto problem = make_problem(params, target, po);
  for (const auto& w : problem->warnings()) std::cerr << "warning: " << w << "\n";

  DEConfig cfg = DEConfig::cold();
  std::optional<OptVector> warm;
  std::string warm_text = "none";
  if (lib) {
    if (const PreMotionEntry* hit = lib->lookup(target.p, po.mode, cfg.r)) {
      cfg = DEConfig::warm();
      warm = hit->s_pre;
      warm_text = "library " + std::to_string(hit->id);
    }
  }
  cfg.seed = seed;
  cfg.workers = workers;
  if (maxgen > 0) cfg.Maxgen = maxgen;
  if (np > 0) cfg.NP = np;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CommandError(kExitUsage, e.what());
  }

  const OptimizeResult r = optimize(*problem, cfg, warm);

  std::string sol;
  sol += "mode = " + a.mode + "\n";
  sol += "robot = " + params.name + "\n";
  sol += "target = " + vector_text({target.p.x(), target.p.y(), target.p.z()}) + "\n";
  sol += "yaw = " + number(target.yaw) + "\n";
  sol += "pitch = " + number(target.pitch) + "\n";
  sol += std::string("vertical = ") + (target.vertical ? "1" : "0") + "\n";
  sol += std::string("time_reading = ") + reading_name(po.reading) + "\n";
  sol += "vector = " + vector_text(r.best.v) + "\n";
  sol += "fitness = " + number(r.evaluation.fitness) + "\n";
  sol += std::string("feasible = ") + (r.feasible ? "yes" : "no") + "\n";
  sol += "generations = " + std::to_string(r.generations) + "\n";
  sol += "generations_to_feasible = " + std::to_string(r.generations_to_feasible) + "\n";
  sol += "warm_start = " + warm_text + "\n";
  write_artifact(out, "solution.txt", sol);
  write_artifact(out, "robot.cfg", robot_to_config(params));

  std::string report = report_to_text(r.evaluation.report);
  try {
    write_artifact(out, "trajectory.csv", trajectory_csv(problem->trajectory(r.best)));
  } catch (const TransformError& e) {
    report += std::string("trajectory unavailable: ") + e.what() + "\n";
  }
  if (r.feasible) {
    try {
      report += write_simulation(out, r.best, *problem, problem->options().dt, nullptr);
    } catch (const TransformError& e) {
      report += std::string("simulation failed: ") + e.what() + "\n";
    }
  }
  for (const auto& w : problem->warnings()) report += "warning " + w + "\n";
  report += std::string("success ") + (r.success ? "yes" : "no") + "\n";
  write_artifact(out, "report.txt", report);

  m.set("mode", a.mode);
  m.set("robot", params.name);
  m.set("warm_start", warm_text);
  m.set("generations", static_cast<long long>(r.generations));
  m.set("generations_to_feasible", static_cast<long long>(r.generations_to_feasible));
  m.set("feasible", std::string(r.feasible ? "yes" : "no"));
  m.set("success", std::string(r.success ? "yes" : "no"));
  m.set("landing_error", r.landing_error);
  m.set("timings", std::string("timing.txt"));
  m.set("results", std::string("solution.txt trajectory.csv body.csv report.txt robot.cfg"));
  write_artifact(out, "manifest.txt", m.text());

  char buf[128];
  std::snprintf(buf, sizeof buf, "solve_wall_s = %.6f\ngenerations = %d\n", r.wall_time, r.generations);
  write_artifact(out, "timing.txt", buf);

  std::printf("%s: fitness %.6g, %d generations, %.3f s, landing error %.3g m\n",
              r.success ? "success" : (r.feasible ? "feasible, landing off target" : "infeasible"),
              r.evaluation.fitness, r.generations, r.wall_time, r.landing_error);
  return r.success ? kExitOk : kExitSolverFailed;
}

int run_simulate(CLI::App* app, const std::string& solution, const std::string& robot, double dt,
                 const std::string& out_dir) {
  const fs::path sol_path(solution);
  KeyValueConfig kv;
  try {
    kv = KeyValueConfig::parse(read_text(sol_path));
  } catch (const ConfigError& e) {
    throw CommandError(kExitDataError, solution + ": " + e.what());
  }
  ProblemArgs a;
  JumpTarget target;
  OptVector opt;
  ProblemOptions po;
  try {
    a.mode = kv.text("mode");
    po.mode = parse_mode(a.mode);
    a.target = kv.numbers("target");
    if (a.target.size() != 3) throw ConfigError("target expects three numbers", kv.lines.at("target"));
    if (kv.has("yaw")) a.yaw = kv.number("yaw");
    if (kv.has("pitch")) a.pitch = kv.number("pitch");
    if (kv.has("vertical")) a.vertical = kv.number("vertical") != 0.0;
    if (kv.has("time_reading")) po.reading = reading_of(kv.text("time_reading"));
    opt = OptVector{po.mode, kv.numbers("vector")};
    if (opt.v.size() != OptVector::dimension(po.mode))
      throw ConfigError("vector has " + std::to_string(opt.v.size()) + " entries, mode " + a.mode + " needs " +
                            std::to_string(OptVector::dimension(po.mode)),
                        kv.lines.at("vector"));
    target = target_of(a);
  } catch (const ConfigError& e) {
    throw CommandError(kExitDataError, solution + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CommandError(kExitDataError, solution + ": " + e.what());
  }
  std::string robot_spec = robot;
  if (robot_spec.empty() && fs::exists(sol_path.parent_path() / "robot.cfg"))
    robot_spec = (sol_path.parent_path() / "robot.cfg").string();
  const RobotParams params = resolve_robot(robot_spec, po.mode);
  if (!(dt > 0.0)) throw CommandError(kExitUsage, "--dt must be positive");

  const auto problem = make_problem(params, target, po);
  const fs::path out(out_dir);
  double err = 0.0;
  std::string report = report_to_text(problem->evaluate(opt).report);
  try {
    report += write_simulation(out, opt, *problem, dt, &err);
  } catch (const TransformError& e) {
    throw CommandError(kExitSolverFailed, std::string("cannot realise the solution: ") + e.what());
  }
  write_artifact(out, "sim_report.txt", report);

  Manifest m;
  m.set("command", std::string("simulate"));
  m.set("config_digest", hex64(fnv1a64(option_digest_text(*app) + robot_to_config(params) + kv.canonical())));
  m.set("dt", dt);
  m.set("landing_error", err);
  m.set("results", std::string(po.mode == JumpMode::Humanoid ? "body.csv zmp.csv sim_report.txt"
                                                              : "body.csv sim_report.txt"));
  write_artifact(out, "manifest.txt", m.text());
  std::printf("simulated %s jump, landing error %.3g m\n", a.mode.c_str(), err);
  return err < kLandingTolerance ? kExitOk : kExitSolverFailed;
}

}  // namespace

void register_optimize(CLI::App& root, std::vector<Command>& out) {
  auto* app = root.add_subcommand("optimize", "solve one jump and write its trajectory");
  auto a = std::make_shared<ProblemArgs>();
  auto library = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(1);
  auto workers = std::make_shared<int>(1);
  auto maxgen = std::make_shared<int>(0);
  auto np = std::make_shared<int>(0);
  auto dir = std::make_shared<std::string>("out");
  add_problem_flags(app, *a, true);
  app->add_option("--library", *library, "pre-motion library directory for warm starts");
  app->add_option("--seed", *seed, "master seed");
  app->add_option("--workers", *workers, "evaluation threads")->check(CLI::PositiveNumber);
  app->add_option("--maxgen", *maxgen, "generation cap (default 200)")->check(CLI::PositiveNumber);
  app->add_option("--np", *np, "population size (default 20)")->check(CLI::Range(4, 100000));
  app->add_option("--out", *dir, "output directory");
  out.push_back({app, [=] { return run_optimize(app, *a, *library, *seed, *workers, *maxgen, *np, *dir); }});
}

void register_simulate(CLI::App& root, std::vector<Command>& out) {
  auto* app = root.add_subcommand("simulate", "replay a solution through the rigid-body simulator");
  auto solution = std::make_shared<std::string>();
  auto robot = std::make_shared<std::string>();
  auto dt = std::make_shared<double>(1e-3);
  auto dir = std::make_shared<std::string>("out");
  app->add_option("--solution", *solution, "solution.txt written by optimize")->required();
  app->add_option("--robot", *robot, "preset or config file (default: robot.cfg beside the solution)");
  app->add_option("--dt", *dt, "integration step (s)");
  app->add_option("--out", *dir, "output directory");
  out.push_back({app, [=] { return run_simulate(app, *solution, *robot, *dt, *dir); }});
}

}  // namespace jumpopt
