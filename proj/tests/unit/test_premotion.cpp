#include <doctest.h>

#include <omnijump/premotion.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace omnijump;
namespace fs = std::filesystem;

namespace {

PreMotionEntry entry(std::int64_t id, double x, double y, double z, JumpMode mode = JumpMode::Omni) {
  PreMotionEntry e;
  e.id = id;
  e.target = {x, y, z};
  e.mode = mode;
  e.s_pre = OptVector{mode, std::vector<double>(OptVector::dimension(mode), 0.1 + 1e-3 * static_cast<double>(id))};
  e.fitness = 100.0 + static_cast<double>(id) / 3.0;
  e.generations = static_cast<int>(id % 200);
  return e;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("omnijump_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("lookup: exact, inside and outside the radius") {
  PreMotionLibrary lib;
  lib.add(entry(0, 0.50, 0.0, 0.3));
  lib.add(entry(1, 0.55, 0.0, 0.3));
  const auto* hit = lib.lookup({0.50, 0.0, 0.3}, JumpMode::Omni);
  REQUIRE(hit != nullptr);
  CHECK(hit->id == 0);
  CHECK(lib.lookup({0.50, 0.0, 0.3}, JumpMode::Agile) == nullptr);
  CHECK(lib.lookup({0.50, 0.06, 0.3}, JumpMode::Omni) == nullptr);
  CHECK(lib.lookup({0.50, 0.04, 0.3}, JumpMode::Omni)->id == 0);
  // Equidistant: the lower id wins.
  CHECK(lib.lookup({0.525, 0.0, 0.3}, JumpMode::Omni)->id == 0);
  // Strictly closer than r.
  CHECK(lib.lookup({0.50, 0.05, 0.3}, JumpMode::Omni, 0.05) == nullptr);
  CHECK(PreMotionLibrary().lookup({0, 0, 0}, JumpMode::Omni) == nullptr);
}

TEST_CASE("grid lookup agrees with a linear scan") {
  PreMotionLibrary lib;
  Rng rng(12);
  std::int64_t id = 0;
  for (double x = -0.5; x <= 1.0001; x += 0.05)
    for (double y = -0.5; y <= 0.5001; y += 0.1) lib.add(entry(id++, x, y, rng.uniform(0.2, 0.4)));
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector3d q(rng.uniform(-0.7, 1.2), rng.uniform(-0.7, 0.7), rng.uniform(0.1, 0.5));
    const double r = rng.uniform(0.01, 0.2);
    const auto* a = lib.lookup(q, JumpMode::Omni, r);
    const auto* b = lib.lookup_scan(q, JumpMode::Omni, r);
    CHECK(a == b);
  }
}

TEST_CASE("add rejects duplicates and infeasible entries") {
  PreMotionLibrary lib;
  lib.add(entry(0, 0.5, 0.0, 0.3));
  CHECK_THROWS_AS(lib.add(entry(1, 0.5, 0.0, 0.3 + 1e-7)), std::invalid_argument);
  CHECK_THROWS_AS(lib.add(entry(0, 0.6, 0.0, 0.3)), std::invalid_argument);
  CHECK_NOTHROW(lib.add(entry(2, 0.5, 0.0, 0.3, JumpMode::Agile)));
  PreMotionEntry bad = entry(3, 0.7, 0, 0.3);
  bad.fitness = 2e4;
  CHECK_THROWS_AS(lib.add(bad), std::invalid_argument);
  PreMotionEntry wrong = entry(4, 0.8, 0, 0.3);
  wrong.s_pre.v.pop_back();
  CHECK_THROWS_AS(lib.add(wrong), std::invalid_argument);
}

TEST_CASE("save and load are exact") {
  PreMotionLibrary lib;
  Rng rng(3);
  for (std::int64_t i = 0; i < 100; ++i) {
    PreMotionEntry e = entry(i, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 0.4),
                             i % 3 == 0 ? JumpMode::Humanoid : JumpMode::Omni);
    for (double& v : e.s_pre.v) v = rng.uniform(-1, 1);
    if (i % 7 == 0) {
      ObstacleRecord o;
      for (double& v : o) v = rng.uniform(-1, 1);
      e.obstacle = o;
    }
    lib.add(e);
  }
  const fs::path d = fresh_dir("save");
  lib.save(d);
  const PreMotionLibrary back = PreMotionLibrary::load(d);
  REQUIRE(back.size() == lib.size());
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const auto& a = lib.entries()[i];
    const auto& b = back.entries()[i];
    CHECK(a.id == b.id);
    CHECK(a.target == b.target);
    CHECK(a.mode == b.mode);
    CHECK(a.s_pre.v == b.s_pre.v);
    CHECK(a.fitness == b.fitness);
    CHECK(a.obstacle == b.obstacle);
  }
  CHECK(back.record_text() == lib.record_text());
  CHECK(back.index_text() == lib.index_text());
  fs::remove_all(d);
}

TEST_CASE("corrupt libraries are rejected") {
  PreMotionLibrary lib;
  for (std::int64_t i = 0; i < 5; ++i) lib.add(entry(i, 0.1 * static_cast<double>(i), 0, 0.3));
  const fs::path d = fresh_dir("corrupt");
  lib.save(d);
  const std::string dat = slurp(d / "premotion.dat");
  {
    std::ofstream out(d / "premotion.dat", std::ios::binary | std::ios::trunc);
    out << dat.substr(0, dat.size() / 2);
  }
  CHECK_THROWS_AS(PreMotionLibrary::load(d), LibraryError);
  {
    std::string flipped = dat;
    flipped[flipped.size() / 2] = flipped[flipped.size() / 2] == '1' ? '2' : '1';
    std::ofstream out(d / "premotion.dat", std::ios::binary | std::ios::trunc);
    out << flipped;
  }
  CHECK_THROWS_AS(PreMotionLibrary::load(d), LibraryError);
  CHECK_THROWS_AS(PreMotionLibrary::load(d / "missing"), LibraryError);
  fs::remove_all(d);
}

TEST_CASE("grid targets") {
  const std::vector<TargetBox> boxes{{{0.0, 0.0, 0.3}, {0.1, 0.05, 0.3}}};
  const auto g = grid_targets(boxes, 0.05, {JumpMode::Omni, JumpMode::Humanoid});
  REQUIRE(g.size() == 12);
  CHECK(g[0].p == Eigen::Vector3d(0.0, 0.0, 0.3));
  CHECK(g[1].p.isApprox(Eigen::Vector3d(0.0, 0.05, 0.3)));
  CHECK(g[2].p.isApprox(Eigen::Vector3d(0.05, 0.0, 0.3)));
  CHECK(g[6].mode == JumpMode::Humanoid);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i].id == static_cast<std::int64_t>(i));
  CHECK(grid_targets({}, 0.05, {JumpMode::Omni}).empty());
  const std::vector<TargetBox> empty{{{0.2, 0, 0.3}, {0.1, 0, 0.3}}};
  CHECK(grid_targets(empty, 0.05, {JumpMode::Omni}).empty());
  CHECK_THROWS_AS(grid_targets(boxes, 0.0, {JumpMode::Omni}), std::invalid_argument);
}

TEST_CASE("building twice gives identical bytes and resumes") {
  BuildOptions o;
  o.boxes = {{{0.4, 0.0, 0.3}, {0.5, 0.0, 0.3}}};
  o.config.seed = 4;
  o.config.Maxgen = 60;
  const fs::path a = fresh_dir("build_a");
  const fs::path b = fresh_dir("build_b");
  PreMotionLibrary la, lb;
  const BuildReport ra = build_library(la, mini_cheetah_params(), o, a);
  (void)build_library(lb, mini_cheetah_params(), o, b);
  CHECK(ra.attempted == 3);
  CHECK(ra.solved + ra.failures.size() == 3);
  CHECK(slurp(a / "premotion.dat") == slurp(b / "premotion.dat"));
  CHECK(slurp(a / "premotion.index") == slurp(b / "premotion.index"));

  PreMotionLibrary again;
  const BuildReport rc = build_library(again, mini_cheetah_params(), o, a);
  CHECK(rc.skipped == ra.solved);
  CHECK(slurp(a / "premotion.dat") == slurp(b / "premotion.dat"));

  for (std::int64_t id : verify_library(la, mini_cheetah_params(), o.problem)) FAIL("stale entry " << id);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}
