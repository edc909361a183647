#include "commands.hpp"

#include <omnijump/premotion.hpp>
#include <omnijump/reloc.hpp>

#include <cmath>
#include <cstdio>
#include <memory>

namespace jumpopt {

namespace {

using namespace omnijump;

struct SolveArgs {
  std::string map;
  std::string points;
  double z = 0.3;
  double eps = 0.1;
  std::vector<double> level;  // roll pitch
  bool refine = true;
  std::string out = "reloc";
};

std::string pose_text(const Pose6& p) {
  std::string s = "rotation =";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += " " + number(p.r(i, j));
  s += "\ntranslation = " + number(p.t.x()) + " " + number(p.t.y()) + " " + number(p.t.z()) + "\n";
  s += "yaw = " + number(std::atan2(p.r(1, 0), p.r(0, 0))) + "\n";
  return s;
}

int run_solve(CLI::App* app, const SolveArgs& a) {
  PlanarPatchMap map;
  std::vector<Eigen::Vector3d> pts;
  const std::string map_text = read_text(a.map);
  const std::string pts_text = read_text(a.points);
  try {
    map = parse_map(map_text);
    pts = parse_points(pts_text);
  } catch (const std::invalid_argument& e) {
    throw CommandError(kExitDataError, e.what());
  }
  if (!(a.eps > 0.0)) throw CommandError(kExitUsage, "--eps must be positive");
  if (!a.level.empty()) {
    const Eigen::Matrix3d lev =
        (Eigen::AngleAxisd(a.level[1], Eigen::Vector3d::UnitY()) * Eigen::AngleAxisd(a.level[0], Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    pts = level_points(pts, lev);
  }

  BnbConfig cfg;
  cfg.eps = a.eps;
  cfg.z = a.z;
  const BnbResult b = bnb_search(pts, map, cfg);
  const Pose6 coarse = Pose6::from_hypothesis(b.best, a.z);

  std::string out = "theta = " + number(b.best.theta) + "\nx = " + number(b.best.x) + "\ny = " + number(b.best.y) +
                    "\ninliers = " + std::to_string(b.inliers) + "\npoints = " + std::to_string(pts.size()) +
                    "\ncandidates = " + std::to_string(b.candidates) + "\nnodes = " +
                    std::to_string(b.nodes_expanded) + "\nexhausted = " + (b.exhausted ? "yes" : "no") + "\n";
  int code = kExitOk;
  Pose6 final_pose = coarse;
  if (a.refine) {
    try {
      const RefineResult r = refine_pose(coarse, pts, map);
      final_pose = r.pose;
      out += "refine_iterations = " + std::to_string(r.iterations) + "\nrefine_cost = " + number(r.cost) +
             "\nrefine_converged = " + (r.converged ? "yes" : "no") + "\n";
    } catch (const DegeneracyError& e) {
      std::string dirs;
      for (const auto& d : e.directions()) dirs += (dirs.empty() ? "" : " ") + d;
      out += "degenerate = " + dirs + "\n";
      std::fprintf(stderr, "refinement degenerate along: %s\n", dirs.c_str());
      code = kExitSolverFailed;
    }
  }
  out += pose_text(final_pose);
  const fs::path dir(a.out);
  write_artifact(dir, "pose.txt", out);

  Manifest m;
  m.set("command", std::string("reloc solve"));
  m.set("config_digest", hex64(fnv1a64(option_digest_text(*app) + map_text + pts_text)));
  m.set("results", std::string("pose.txt"));
  write_artifact(dir, "manifest.txt", m.text());
  std::printf("theta %.6f x %.4f y %.4f inliers %d/%zu\n", b.best.theta, b.best.x, b.best.y, b.inliers, pts.size());
  return code;
}

int run_synth(std::uint64_t seed, const SceneOptions& o, const std::string& out_dir) {
  if (o.points <= 0) throw CommandError(kExitUsage, "--points must be positive");
  if (o.outlier_fraction < 0.0 || o.outlier_fraction > 1.0)
    throw CommandError(kExitUsage, "--outliers must lie in [0, 1]");
  if (o.noise < 0.0) throw CommandError(kExitUsage, "--noise must be non-negative");
  const SyntheticScene s = synthetic_scene(seed, o);
  std::string map;
  for (const auto& p : s.map.patches)
    map += number(p.n.x()) + " " + number(p.n.y()) + " " + number(p.n.z()) + " " + number(p.d) + "\n";
  std::string pts;
  for (const auto& p : s.points) pts += number(p.x()) + " " + number(p.y()) + " " + number(p.z()) + "\n";
  std::string truth = "theta = " + number(s.truth.theta) + "\nx = " + number(s.truth.x) + "\ny = " +
                      number(s.truth.y) + "\nz = " + number(s.z) + "\n";
  const fs::path dir(out_dir);
  write_artifact(dir, "map.txt", map);
  write_artifact(dir, "points.txt", pts);
  write_artifact(dir, "truth.txt", truth);
  std::printf("%zu planes, %zu points\n", s.map.patches.size(), s.points.size());
  return kExitOk;
}

}  // namespace

void register_reloc(CLI::App& root, std::vector<Command>& out) {
  auto* app = root.add_subcommand("reloc", "global relocalization against a plane map");
  app->require_subcommand(1);

  auto* solve = app->add_subcommand("solve", "branch and bound, then robust refinement");
  auto a = std::make_shared<SolveArgs>();
  solve->add_option("--map", a->map, "planes, one \"nx ny nz d\" per line")->required();
  solve->add_option("--points,--cloud", a->points, "body-frame cloud, one \"x y z\" per line")->required();
  solve->add_option("--z,--z-star", a->z, "known body height (m)");
  solve->add_option("--eps", a->eps, "inlier threshold (m)");
  solve->add_option("--level", a->level, "IMU roll and pitch used to level the cloud (rad)")->expected(2);
  solve->add_flag("!--no-refine", a->refine, "skip the refinement step");
  solve->add_option("--out", a->out, "output directory");
  out.push_back({solve, [=] { return run_solve(solve, *a); }});

  auto* synth = app->add_subcommand("synth", "write a random plane map, cloud and ground truth");
  auto seed = std::make_shared<std::uint64_t>(1);
  auto o = std::make_shared<SceneOptions>();
  auto dir = std::make_shared<std::string>("scene");
  synth->add_option("--seed", *seed, "scene seed");
  synth->add_option("--points", o->points, "cloud size");
  synth->add_option("--outliers", o->outlier_fraction, "outlier fraction");
  synth->add_option("--noise", o->noise, "inlier noise sigma (m)");
  synth->add_option("--out", *dir, "output directory");
  out.push_back({synth, [=] { return run_synth(*seed, *o, *dir); }});
}

}  // namespace jumpopt
