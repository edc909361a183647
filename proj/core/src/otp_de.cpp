#include "omnijump/otp_de.hpp"

#include "omnijump/jump_sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace omnijump {

namespace {

constexpr std::uint64_t kInitStream = 0xFFFFFFFFull;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("DEConfig: " + what);
}

}  // namespace

DEConfig DEConfig::cold() { return DEConfig{}; }

DEConfig DEConfig::warm() {
  DEConfig c;
  c.F = 0.9;
  c.CR = 0.95;
  c.Pmu = 0.5;
  return c;
}

void DEConfig::validate() const {
  require(std::isfinite(F) && F > 0.0 && F <= 2.0, "F must be in (0, 2]");
  require(std::isfinite(CR) && CR >= 0.0 && CR <= 1.0, "CR must be in [0, 1]");
  require(std::isfinite(Pmu) && Pmu >= 0.0 && Pmu <= 1.0, "Pmu must be in [0, 1]");
  require(NP >= 4, "NP must be at least 4 (rand/1 needs three distinct donors)");
  require(Maxgen >= 0, "Maxgen must be non-negative");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
  require(workers >= 1, "workers must be at least 1");
  require(stall_generations >= 1, "stall_generations must be at least 1");
  require(stall_tolerance >= 0.0, "stall_tolerance must be non-negative");
  require(warm_box > 0.0 && warm_box <= 1.0, "warm_box must be in (0, 1]");
}

Population lhs_sample(const SearchSpace& space, int np, Rng& rng) {
  space.validate();
  if (np < 1) throw std::invalid_argument("lhs_sample: np must be positive");
  const std::size_t d = space.dims();
  Population pop(static_cast<std::size_t>(np), Individual(d));
  std::vector<int> strata(static_cast<std::size_t>(np));
  for (std::size_t j = 0; j < d; ++j) {
    for (int i = 0; i < np; ++i) strata[static_cast<std::size_t>(i)] = i;
    rng.shuffle(strata);
    const double w = (space.upper[j] - space.lower[j]) / np;
    for (int i = 0; i < np; ++i) {
      const int s = strata[static_cast<std::size_t>(i)];
      pop[static_cast<std::size_t>(i)][j] = space.lower[j] + w * (s + rng.uniform());
    }
  }
  return pop;
}

Individual make_trial(const Population& pop, int target, const DEConfig& cfg,
                      const SearchSpace& space, Rng& rng) {
  const int np = static_cast<int>(pop.size());
  if (np < 4) throw std::invalid_argument("make_trial: population needs at least 4 individuals");
  int r[3];
  for (int k = 0; k < 3; ++k) {
    int c;
    do {
      c = static_cast<int>(rng.below(static_cast<std::uint64_t>(np)));
    } while (c == target || (k > 0 && c == r[0]) || (k > 1 && c == r[1]));
    r[k] = c;
  }
  const auto& x = pop[static_cast<std::size_t>(target)];
  const auto& a = pop[static_cast<std::size_t>(r[0])];
  const auto& b = pop[static_cast<std::size_t>(r[1])];
  const auto& c = pop[static_cast<std::size_t>(r[2])];
  const std::size_t d = x.size();

  Individual trial = x;
  const std::size_t forced = static_cast<std::size_t>(rng.below(d));
  for (std::size_t j = 0; j < d; ++j)
    if (j == forced || rng.uniform() < cfg.CR) trial[j] = a[j] + cfg.F * (b[j] - c[j]);

  if (rng.uniform() < cfg.Pmu) {
    const std::size_t j = static_cast<std::size_t>(rng.below(d));
    trial[j] = rng.uniform(space.lower[j], space.upper[j]);
  }
  for (std::size_t j = 0; j < d; ++j) trial[j] = std::clamp(trial[j], space.lower[j], space.upper[j]);
  return trial;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int extra = std::min(workers, n) - 1;
  pool.reserve(static_cast<std::size_t>(extra));
  for (int t = 0; t < extra; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> evaluate_population(const Population& pop, const Objective& objective,
                                        int workers) {
  std::vector<double> fit(pop.size());
  parallel_for(static_cast<int>(pop.size()), workers,
               [&](int i) { fit[static_cast<std::size_t>(i)] = objective(pop[static_cast<std::size_t>(i)]); });
  return fit;
}

void de_step(Population& pop, std::vector<double>& fit, const Objective& objective,
             const DEConfig& cfg, const SearchSpace& space, std::uint64_t generation) {
  if (pop.size() < 4) throw std::invalid_argument("de_step: population needs at least 4 individuals");
  if (fit.size() != pop.size()) throw std::invalid_argument("de_step: fitness/population size mismatch");
  const int np = static_cast<int>(pop.size());
  Population trials(pop.size());
  for (int i = 0; i < np; ++i) {
    Rng rng = Rng::derive(cfg.seed, generation, static_cast<std::uint64_t>(i));
    trials[static_cast<std::size_t>(i)] = make_trial(pop, i, cfg, space, rng);
  }
  const std::vector<double> tf = evaluate_population(trials, objective, cfg.workers);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (tf[i] < fit[i]) {
      pop[i] = std::move(trials[i]);
      fit[i] = tf[i];
    }
  }
}

SearchSpace warm_space(const SearchSpace& space, const Individual& center, double fraction) {
  if (center.size() != space.dims())
    throw std::invalid_argument("warm start dimension " + std::to_string(center.size()) +
                                " does not match search space dimension " +
                                std::to_string(space.dims()));
  SearchSpace w = space;
  for (std::size_t j = 0; j < space.dims(); ++j) {
    const double half = fraction * (space.upper[j] - space.lower[j]);
    const double c = std::clamp(center[j], space.lower[j], space.upper[j]);
    w.lower[j] = std::max(space.lower[j], c - half);
    w.upper[j] = std::min(space.upper[j], c + half);
  }
  return w;
}

DERun run_de(const Objective& objective, const SearchSpace& space, const DEConfig& cfg,
             const std::optional<Individual>& warm) {
  cfg.validate();
  space.validate();
  Rng init = Rng::derive(cfg.seed, kInitStream, 0);
  Population pop;
  if (warm) {
    const SearchSpace ws = warm_space(space, *warm, cfg.warm_box);
    pop = lhs_sample(ws, cfg.NP - 1, init);
    Individual s0 = *warm;
    for (std::size_t j = 0; j < s0.size(); ++j) s0[j] = std::clamp(s0[j], space.lower[j], space.upper[j]);
    pop.insert(pop.begin(), std::move(s0));
  } else {
    pop = lhs_sample(space, cfg.NP, init);
  }
  std::vector<double> fit = evaluate_population(pop, objective, cfg.workers);

  DERun run;
  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  };
  run.best_history.push_back(fit[best_index()]);
  if (run.best_history.back() < cfg.epsilon) run.generations_to_feasible = 0;

  for (int g = 1; g <= cfg.Maxgen; ++g) {
    if (run.generations_to_feasible >= 0) {
      const int since = g - 1 - run.generations_to_feasible;
      if (since >= cfg.stall_generations) {
        const double past = run.best_history[run.best_history.size() - 1 -
                                             static_cast<std::size_t>(cfg.stall_generations)];
        const double now = run.best_history.back();
        const double rel = past > 0.0 ? (past - now) / past : 0.0;
        if (rel < cfg.stall_tolerance) break;
      }
    }
    de_step(pop, fit, objective, cfg, space, static_cast<std::uint64_t>(g));
    run.generations = g;
    run.best_history.push_back(fit[best_index()]);
    if (run.generations_to_feasible < 0 && run.best_history.back() < cfg.epsilon)
      run.generations_to_feasible = g;
  }
  const std::size_t b = best_index();
  run.best = pop[b];
  run.best_fitness = fit[b];
  return run;
}

OptimizeResult optimize(const JumpProblem& problem, const DEConfig& cfg,
                        const std::optional<OptVector>& warm) {
  const auto start = std::chrono::steady_clock::now();
  std::optional<Individual> seed;
  if (warm) {
    if (warm->mode != problem.options().mode)
      throw std::invalid_argument(std::string("warm start mode ") + mode_name(warm->mode) +
                                  " does not match problem mode " + mode_name(problem.options().mode));
    seed = warm->v;
  }
  const Objective objective = [&](const Individual& x) {
    return problem.evaluate(problem.make_vector(x)).fitness;
  };
  const DERun run = run_de(objective, problem.space(), cfg, seed);

  OptimizeResult out;
  out.best = problem.make_vector(run.best);
  out.evaluation = problem.evaluate(out.best);
  out.feasible = out.evaluation.report.feasible();
  out.generations = run.generations;
  out.generations_to_feasible = run.generations_to_feasible;
  out.best_history = run.best_history;
  out.warm_started = warm.has_value();
  if (out.feasible) {
    try {
      const SimOutcome sim = simulate_jump(out.best, problem, problem.options().dt);
      out.landing_error = sim.target_error;
      out.success = out.landing_error < kLandingTolerance;
    } catch (const std::exception&) {
      out.success = false;
    }
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace omnijump
