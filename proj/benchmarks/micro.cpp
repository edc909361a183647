#include <benchmark/benchmark.h>

#include <omnijump/jump_problem.hpp>
#include <omnijump/premotion.hpp>
#include <omnijump/reloc.hpp>
#include <omnijump/rng.hpp>

using namespace omnijump;

namespace {

JumpProblem forward_problem() {
  JumpTarget t;
  t.p = {0.6, 0.2, 0.3};
  return JumpProblem(mini_cheetah_params(), t, ProblemOptions{});
}

std::vector<double> box_midpoint(const SearchSpace& s) {
  std::vector<double> x(s.dims());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * (s.lower[i] + s.upper[i]);
  return x;
}

}  // namespace

// One fitness evaluation: transform, integration and constraint scan.
static void BM_Evaluate(benchmark::State& state) {
  const JumpProblem p = forward_problem();
  const OptVector x = p.make_vector(box_midpoint(p.space()));
  for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(x));
}
BENCHMARK(BM_Evaluate);

static void BM_Trajectory(benchmark::State& state) {
  const JumpProblem p = forward_problem();
  const OptVector x = p.make_vector(box_midpoint(p.space()));
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(p.trajectory(x));
    } catch (const std::exception&) {
    }
  }
}
BENCHMARK(BM_Trajectory);

static void BM_Consensus(benchmark::State& state) {
  const SyntheticScene s = synthetic_scene(1, {static_cast<int>(state.range(0)), 0.2, 0.005, 4, 14, 0.3});
  for (auto _ : state) benchmark::DoNotOptimize(consensus(s.truth, s.points, s.map, 0.1, s.z));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Consensus)->Arg(300)->Arg(1500);

static void BM_BnbSearch(benchmark::State& state) {
  const SyntheticScene s = synthetic_scene(2, {300, 0.2, 0.005, 4, 8, 0.3});
  BnbConfig c;
  c.z = s.z;
  for (auto _ : state) benchmark::DoNotOptimize(bnb_search(s.points, s.map, c));
}
BENCHMARK(BM_BnbSearch)->Unit(benchmark::kMillisecond);

static void BM_Lookup(benchmark::State& state) {
  PreMotionLibrary lib;
  const JumpProblem p = forward_problem();
  const OptVector x = p.make_vector(box_midpoint(p.space()));
  std::int64_t id = 0;
  for (int i = 0; i <= 20; ++i)
    for (int j = -10; j <= 10; ++j)
      for (int k = 0; k < 5; ++k) {
        PreMotionEntry e;
        e.id = id++;
        e.target = {0.05 * i, 0.05 * j, 0.2 + 0.05 * k};
        e.s_pre = x;
        lib.add(e);
      }
  Rng rng(3);
  std::vector<Eigen::Vector3d> queries;
  for (int q = 0; q < 1024; ++q) queries.emplace_back(rng.uniform(0, 1), rng.uniform(-0.5, 0.5), rng.uniform(0.2, 0.4));
  std::size_t q = 0;
  for (auto _ : state) {
    const auto& target = queries[q++ & 1023];
    benchmark::DoNotOptimize(state.range(0) ? lib.lookup(target, JumpMode::Omni) : lib.lookup_scan(target, JumpMode::Omni));
  }
}
BENCHMARK(BM_Lookup)->ArgName("grid")->Arg(1)->Arg(0);

BENCHMARK_MAIN();
