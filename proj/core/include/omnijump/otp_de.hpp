#pragma once

#include "omnijump/jump_problem.hpp"
#include "omnijump/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace omnijump {

struct DEConfig {
  double F = 0.85;
  double CR = 0.75;
  double Pmu = 0.05;
  int NP = 20;
  int Maxgen = 200;
  double r = 0.05;          // warm-start lookup radius, m
  double epsilon = 1e4;     // fitness below this certifies feasibility
  std::uint64_t seed = 1;
  int workers = 1;
  int stall_generations = 15;
  double stall_tolerance = 1e-3;  // relative energy improvement
  double warm_box = 0.1;          // warm box half-width as a fraction of each range

  static DEConfig cold();
  static DEConfig warm();
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

using Individual = std::vector<double>;
using Population = std::vector<Individual>;
using Objective = std::function<double(const Individual&)>;

/// One stratum per individual per dimension, strata shuffled independently.
Population lhs_sample(const SearchSpace& space, int np, Rng& rng);

/// rand/1/bin trial for `target` plus the single-component reset, clamped to bounds.
Individual make_trial(const Population& pop, int target, const DEConfig& cfg,
                      const SearchSpace& space, Rng& rng);

/// One generation: trials from per-individual substreams of (cfg.seed, generation),
/// evaluated on cfg.workers threads, then greedy selection (ties keep the incumbent).
/// Throws std::invalid_argument when NP < 4.
void de_step(Population& pop, std::vector<double>& fit, const Objective& objective,
             const DEConfig& cfg, const SearchSpace& space, std::uint64_t generation);

/// Evaluates every individual, in parallel, deterministically.
std::vector<double> evaluate_population(const Population& pop, const Objective& objective,
                                        int workers);

/// Runs `fn(i)` for i in [0, n) on `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

struct DERun {
  Individual best;
  double best_fitness = 0.0;
  int generations = 0;
  int generations_to_feasible = -1;  // -1: never below epsilon
  std::vector<double> best_history;  // best fitness after init and each generation
};

/// Generic driver: LHS (or a warm population) then generations until Maxgen or
/// the feasible stall rule fires.
DERun run_de(const Objective& objective, const SearchSpace& space, const DEConfig& cfg,
             const std::optional<Individual>& warm = std::nullopt);

/// Warm box: +-warm_box of each range around `center`, intersected with the space.
SearchSpace warm_space(const SearchSpace& space, const Individual& center, double fraction);

struct OptimizeResult {
  OptVector best;
  Evaluation evaluation;
  bool feasible = false;  // all constraints satisfied
  bool success = false;   // feasible and simulated landing error below tolerance
  double landing_error = 0.0;
  int generations = 0;
  int generations_to_feasible = -1;
  double wall_time = 0.0;  // s
  bool warm_started = false;
  std::vector<double> best_history;
};

inline constexpr double kLandingTolerance = 0.05;  // m

/// Solves one jump. Warm start seeds the population around `warm` (inserted as
/// the first individual) and is expected with DEConfig::warm() operators.
OptimizeResult optimize(const JumpProblem& problem, const DEConfig& cfg,
                        const std::optional<OptVector>& warm = std::nullopt);

}  // namespace omnijump
