#include <doctest.h>

#include <omnijump/otp_de.hpp>

#include <cmath>
#include <set>

using namespace omnijump;

namespace {

SearchSpace box(std::size_t d, double lo, double hi) {
  SearchSpace s;
  s.lower.assign(d, lo);
  s.upper.assign(d, hi);
  s.c_dims = d;
  return s;
}

double sphere(const Individual& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

// Keeps the feasible stall rule out of plain optimisation tests.
DEConfig plain(std::uint64_t seed) {
  DEConfig c = DEConfig::cold();
  c.seed = seed;
  c.epsilon = 1e-300;
  return c;
}

}  // namespace

TEST_CASE("operator presets") {
  const DEConfig c = DEConfig::cold();
  CHECK(c.F == 0.85);
  CHECK(c.CR == 0.75);
  CHECK(c.Pmu == 0.05);
  CHECK(c.NP == 20);
  CHECK(c.Maxgen == 200);
  const DEConfig w = DEConfig::warm();
  CHECK(w.F == 0.9);
  CHECK(w.CR == 0.95);
  CHECK(w.Pmu == 0.5);
  DEConfig bad = c;
  bad.NP = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.CR = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("lhs puts one sample in every stratum") {
  const SearchSpace s = box(3, -1.0, 3.0);
  Rng rng(1);
  const Population p = lhs_sample(s, 4, rng);
  REQUIRE(p.size() == 4);
  for (std::size_t j = 0; j < 3; ++j) {
    std::set<int> strata;
    for (const auto& x : p) strata.insert(static_cast<int>(std::floor(x[j] + 1.0)));
    CHECK(strata == std::set<int>{0, 1, 2, 3});
  }
  const Population one = lhs_sample(s, 1, rng);
  for (double v : one[0]) CHECK((v >= -1.0 && v < 3.0));
  CHECK_THROWS_AS(lhs_sample(s, 0, rng), std::invalid_argument);
}

TEST_CASE("lhs marginals are uniform when pooled") {
  const SearchSpace s = box(2, 0.0, 1.0);
  Rng rng(2);
  int bins[10] = {};
  int n = 0;
  for (int k = 0; k < 500; ++k)
    for (const auto& x : lhs_sample(s, 20, rng)) {
      ++bins[std::min(9, static_cast<int>(x[0] * 10))];
      ++n;
    }
  CHECK(n == 10000);
  for (int b : bins) CHECK(std::abs(b - 1000) < 150);
}

TEST_CASE("trial with F = 0 and CR = 1 copies the first donor") {
  const SearchSpace s = box(4, -10, 10);
  Rng init(3);
  const Population pop = lhs_sample(s, 8, init);
  DEConfig c = DEConfig::cold();
  c.F = 1e-300;  // F must be positive; this is zero in double arithmetic once scaled
  c.CR = 1.0;
  c.Pmu = 0.0;
  for (int t = 0; t < 8; ++t) {
    Rng a(100 + t), b(100 + t);
    const Individual trial = make_trial(pop, t, c, s, a);
    // Replay the donor draw.
    const int r0 = [&] {
      int x;
      do x = static_cast<int>(b.below(8));
      while (x == t);
      return x;
    }();
    CHECK(trial == pop[static_cast<std::size_t>(r0)]);
  }
}

TEST_CASE("trials stay inside the box") {
  const SearchSpace s = box(5, 0.0, 1.0);
  Rng rng(4);
  const Population pop = lhs_sample(s, 10, rng);
  DEConfig c = DEConfig::cold();
  c.F = 2.0;
  c.Pmu = 1.0;
  for (int k = 0; k < 1000; ++k) CHECK(s.contains(make_trial(pop, k % 10, c, s, rng)));
}

TEST_CASE("small populations are rejected") {
  const SearchSpace s = box(2, 0, 1);
  Rng rng(5);
  Population pop = lhs_sample(s, 3, rng);
  std::vector<double> fit(3, 1.0);
  CHECK_THROWS_AS(make_trial(pop, 0, DEConfig::cold(), s, rng), std::invalid_argument);
  CHECK_THROWS_AS(de_step(pop, fit, sphere, DEConfig::cold(), s, 1), std::invalid_argument);
}

TEST_CASE("best fitness never increases") {
  const DERun r = run_de(sphere, box(5, -5, 5), plain(6));
  for (std::size_t k = 1; k < r.best_history.size(); ++k) CHECK(r.best_history[k] <= r.best_history[k - 1]);
  CHECK(r.generations == 200);
}

TEST_CASE("sphere is solved on average") {
  double sum = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) sum += run_de(sphere, box(5, -5, 5), plain(seed)).best_fitness;
  CHECK(sum / 20 < 1e-3);
}

TEST_CASE("runs are deterministic across worker counts") {
  DEConfig a = plain(9);
  a.Maxgen = 40;
  DEConfig b = a;
  b.workers = 4;
  const DERun x = run_de(sphere, box(4, -3, 3), a);
  const DERun y = run_de(sphere, box(4, -3, 3), a);
  const DERun z = run_de(sphere, box(4, -3, 3), b);
  CHECK(x.best == y.best);
  CHECK(x.best == z.best);
  CHECK(x.best_history == z.best_history);
}

TEST_CASE("feasible stall rule stops early") {
  DEConfig c = DEConfig::cold();
  c.epsilon = 1e9;  // everything is feasible from the start
  const DERun r = run_de([](const Individual&) { return 5.0; }, box(3, 0, 1), c);
  CHECK(r.generations_to_feasible == 0);
  CHECK(r.generations == c.stall_generations);
}

TEST_CASE("warm start seeds the population around the centre") {
  const SearchSpace s = box(3, 0, 10);
  const Individual centre{1.0, 5.0, 9.5};
  const SearchSpace w = warm_space(s, centre, 0.1);
  CHECK(w.lower == std::vector<double>{0.0, 4.0, 8.5});
  CHECK(w.upper == std::vector<double>{2.0, 6.0, 10.0});
  CHECK_THROWS_AS(warm_space(s, Individual{1.0}, 0.1), std::invalid_argument);

  DEConfig c = DEConfig::warm();
  c.Maxgen = 0;
  std::vector<Individual> seen;
  const Objective record = [&](const Individual& x) {
    seen.push_back(x);
    return sphere(x);
  };
  (void)run_de(record, s, c, centre);
  REQUIRE(seen.size() == 20);
  CHECK(seen[0] == centre);
  for (const auto& x : seen) CHECK(w.contains(x));
}
