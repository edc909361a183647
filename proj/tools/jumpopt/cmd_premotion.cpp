#include "commands.hpp"

#include <omnijump/bench.hpp>
#include <omnijump/premotion.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>

namespace jumpopt {

namespace {

using namespace omnijump;

struct BuildArgs {
  int range = 0;
  std::vector<double> grid;
  double step = 0.05;
  std::size_t stride = 1;
  std::vector<std::string> modes{"omni"};
  std::uint64_t seed = 1;
  int workers = 1;
  int maxgen = 0;
  int np = 0;
  std::string robot;
  std::string out = "library";
};

PreMotionLibrary open_library(const std::string& dir) {
  if (!fs::is_directory(dir)) throw CommandError(kExitNoInput, "library directory not found: " + dir);
  try {
    return PreMotionLibrary::load(dir);
  } catch (const LibraryError& e) {
    throw CommandError(kExitDataError, e.what());
  }
}

int run_build(CLI::App* app, const BuildArgs& a) {
  if ((a.range != 0) == !a.grid.empty()) throw CommandError(kExitUsage, "give exactly one of --range or --grid");
  if (!(a.step > 0.0) || !std::isfinite(a.step)) throw CommandError(kExitUsage, "--step must be positive");
  BuildOptions o;
  o.step = a.step;
  o.stride = a.stride;
  o.workers = a.workers;
  o.config.seed = a.seed;
  if (a.maxgen > 0) o.config.Maxgen = a.maxgen;
  if (a.np > 0) o.config.NP = a.np;
  o.modes.clear();
  for (const auto& m : a.modes) {
    try {
      o.modes.push_back(parse_mode(m));
    } catch (const std::invalid_argument& e) {
      throw CommandError(kExitUsage, e.what());
    }
  }
  if (a.range != 0) {
    o.boxes = reference_range(a.range, a.step);
  } else {
    TargetBox b;
    b.lower = {a.grid[0], a.grid[1], a.grid[2]};
    b.upper = {a.grid[3], a.grid[4], a.grid[5]};
    o.boxes.push_back(b);
  }
  const RobotParams params = resolve_robot(a.robot, o.modes.front());
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CommandError(kExitCantCreate, "cannot create " + dir.string());

  PreMotionLibrary lib;
  BuildReport rep;
  try {
    rep = build_library(lib, params, o, dir, [](const std::string& s) { std::cerr << s << "\n"; });
  } catch (const LibraryError& e) {
    throw CommandError(kExitDataError, std::string("cannot resume: ") + e.what());
  }

  Manifest m;
  m.set("command", std::string("premotion build"));
  m.set("config_digest", hex64(fnv1a64(option_digest_text(*app) + robot_to_config(params))));
  m.set("seed", static_cast<long long>(a.seed));
  m.set("robot", params.name);
  m.set("attempted", static_cast<long long>(rep.attempted));
  m.set("solved", static_cast<long long>(rep.solved));
  m.set("resumed", static_cast<long long>(rep.skipped));
  m.set("failed", static_cast<long long>(rep.failures.size()));
  m.set("entries", static_cast<long long>(lib.size()));
  m.set("results", std::string("premotion.index premotion.dat premotion.failures"));
  write_artifact(dir, "manifest.txt", m.text());
  write_artifact(dir, "robot.cfg", robot_to_config(params));
  std::printf("%zu entries (%zu solved now, %zu resumed, %zu failed)\n", lib.size(), rep.solved, rep.skipped,
              rep.failures.size());
  return kExitOk;
}

int run_stats(const std::string& dir, bool verify, const std::string& robot) {
  const PreMotionLibrary lib = open_library(dir);
  std::map<std::string, int> by;
  for (const auto& e : lib.entries())
    by[std::string(mode_name(e.mode)) + " " + direction_name(classify_direction(e.target))]++;
  std::printf("entries %zu\n", lib.size());
  for (const auto& [k, n] : by) std::printf("  %s %d\n", k.c_str(), n);
  if (!verify) return kExitOk;

  std::string spec = robot;
  if (spec.empty() && fs::exists(fs::path(dir) / "robot.cfg")) spec = (fs::path(dir) / "robot.cfg").string();
  const RobotParams params = resolve_robot(spec, JumpMode::Omni);
  const auto stale = verify_library(lib, params, ProblemOptions{});
  std::printf("stale %zu\n", stale.size());
  for (auto id : stale) std::printf("  %lld\n", static_cast<long long>(id));
  return stale.empty() ? kExitOk : kExitSolverFailed;
}

int run_lookup(const std::string& dir, const std::vector<double>& p, const std::string& mode, double radius) {
  const PreMotionLibrary lib = open_library(dir);
  if (!(radius > 0.0)) throw CommandError(kExitUsage, "--radius must be positive");
  JumpMode m;
  try {
    m = parse_mode(mode);
  } catch (const std::invalid_argument& e) {
    throw CommandError(kExitUsage, e.what());
  }
  const Eigen::Vector3d q(p[0], p[1], p[2]);
  const PreMotionEntry* e = lib.lookup(q, m, radius);
  if (e == nullptr) {
    std::printf("miss\n");
    return kExitSolverFailed;
  }
  std::printf("id %lld\ntarget %s %s %s\ndistance %s\nfitness %s\nvector",
              static_cast<long long>(e->id), number(e->target.x()).c_str(), number(e->target.y()).c_str(),
              number(e->target.z()).c_str(), number((e->target - q).norm()).c_str(), number(e->fitness).c_str());
  for (double v : e->s_pre.v) std::printf(" %s", number(v).c_str());
  std::printf("\n");
  return kExitOk;
}

}  // namespace

void register_premotion(CLI::App& root, std::vector<Command>& out) {
  auto* app = root.add_subcommand("premotion", "build and query the pre-motion library");
  app->require_subcommand(1);

  auto* build = app->add_subcommand("build", "solve a grid cold and store the feasible results");
  auto a = std::make_shared<BuildArgs>();
  build->add_option("--range", a->range, "predefined target range 1, 2 or 3")->check(CLI::Range(1, 3));
  build->add_option("--grid", a->grid, "custom box: xmin ymin zmin xmax ymax zmax")->expected(6);
  build->add_option("--step", a->step, "grid spacing (m)");
  build->add_option("--stride", a->stride, "keep every n-th grid target")->check(CLI::PositiveNumber);
  build->add_option("--modes", a->modes, "comma separated modes")->delimiter(',');
  build->add_option("--seed", a->seed, "master seed");
  build->add_option("--workers", a->workers, "parallel solves")->check(CLI::PositiveNumber);
  build->add_option("--maxgen", a->maxgen, "generation cap")->check(CLI::PositiveNumber);
  build->add_option("--np", a->np, "population size")->check(CLI::Range(4, 100000));
  build->add_option("--robot", a->robot, "preset or config file");
  build->add_option("--out", a->out, "library directory (resumed when it exists)");
  out.push_back({build, [=] { return run_build(build, *a); }});

  auto* stats = app->add_subcommand("stats", "count entries per mode and direction");
  auto sdir = std::make_shared<std::string>();
  auto verify = std::make_shared<bool>(false);
  auto srobot = std::make_shared<std::string>();
  stats->add_option("--library", *sdir, "library directory")->required();
  stats->add_flag("--verify", *verify, "re-evaluate every entry and list stale ones");
  stats->add_option("--robot", *srobot, "preset or config file (default: the library's robot.cfg)");
  out.push_back({stats, [=] { return run_stats(*sdir, *verify, *srobot); }});

  auto* lookup = app->add_subcommand("lookup", "nearest entry within a radius");
  auto ldir = std::make_shared<std::string>();
  auto target = std::make_shared<std::vector<double>>();
  auto mode = std::make_shared<std::string>("omni");
  auto radius = std::make_shared<double>(0.05);
  lookup->add_option("--library", *ldir, "library directory")->required();
  lookup->add_option("--target", *target, "x y z")->expected(3)->required();
  lookup->add_option("--mode", *mode, "omni, agile or humanoid");
  lookup->add_option("--radius", *radius, "search radius (m)");
  out.push_back({lookup, [=] { return run_lookup(*ldir, *target, *mode, *radius); }});
}

}  // namespace jumpopt
