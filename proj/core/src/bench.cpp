#include "omnijump/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace omnijump {

namespace {

constexpr double kSignTol = 1e-9;

int sign_of(double v) { return v > kSignTol ? 1 : (v < -kSignTol ? -1 : 0); }

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::N: return "N";
    case Direction::NE: return "NE";
    case Direction::E: return "E";
    case Direction::SE: return "SE";
    case Direction::S: return "S";
    case Direction::SW: return "SW";
    case Direction::W: return "W";
    case Direction::NW: return "NW";
    case Direction::Vertical: return "vertical";
  }
  return "?";
}

Direction classify_direction(const Eigen::Vector3d& p) {
  const int sx = sign_of(p.x());
  const int sy = sign_of(p.y());  // y > 0 is to the left, i.e. west
  if (sx > 0) return sy == 0 ? Direction::N : (sy > 0 ? Direction::NW : Direction::NE);
  if (sx < 0) return sy == 0 ? Direction::S : (sy > 0 ? Direction::SW : Direction::SE);
  if (sy > 0) return Direction::W;
  if (sy < 0) return Direction::E;
  return Direction::Vertical;
}

std::vector<TargetBox> reference_range(int range, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  double reach = 0.0;
  switch (range) {
    case 1: reach = 1.0; break;
    case 2: reach = 1.2; break;
    case 3: reach = 1.3; break;
    default: throw std::invalid_argument("range must be 1, 2 or 3");
  }
  const double side = 0.6;
  const double zlo = 0.2, zhi = 0.6;
  std::vector<TargetBox> boxes(4);
  boxes[0].lower = {0.3, -side, zlo};
  boxes[0].upper = {reach, side, zhi};
  boxes[1].lower = {-reach, -side, zlo};
  boxes[1].upper = {-0.3, side, zhi};
  boxes[2].lower = {0.0, step, zlo};
  boxes[2].upper = {0.0, side, zhi};
  boxes[3].lower = {0.0, -side, zlo};
  boxes[3].upper = {0.0, -step, zhi};
  return boxes;
}

SolveRecord solve_target(const RobotParams& params, const GridTarget& target,
                         const ProblemOptions& problem, const DEConfig& config,
                         const std::optional<OptVector>& warm) {
  SolveRecord rec;
  rec.id = target.id;
  rec.mode = target.mode;
  rec.p = target.p;
  rec.direction = classify_direction(target.p);
  const auto start = std::chrono::steady_clock::now();
  try {
    ProblemOptions po = problem;
    po.mode = target.mode;
    JumpTarget jt;
    jt.p = target.p;
    const JumpProblem jp(params, jt, po);
    const OptimizeResult r = optimize(jp, config, warm);
    rec.feasible = r.feasible;
    rec.success = r.success;
    rec.fitness = r.evaluation.fitness;
    rec.landing_error = r.landing_error;
    rec.generations = r.generations;
    rec.generations_to_feasible = r.generations_to_feasible;
    rec.best = r.best;
    rec.wall_time = r.wall_time;
    if (!r.feasible) {
      rec.failure = "infeasible";
    } else if (!r.success) {
      rec.failure = "landing error " + fmt("%.4f", r.landing_error);
    }
  } catch (const std::exception& e) {
    rec.failure = e.what();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

std::vector<SolveRecord> run_grid(const RobotParams& params, const GridBenchOptions& options,
                                  const std::function<void(const SolveRecord&)>& progress) {
  options.config.validate();
  if (options.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (options.stride < 1) throw std::invalid_argument("stride must be at least 1");
  if (options.seeds < 1) throw std::invalid_argument("seeds must be at least 1");

  const auto all = grid_targets(options.boxes, options.step, options.modes);
  std::vector<std::pair<GridTarget, int>> jobs;
  for (std::size_t i = 0; i < all.size(); i += options.stride) {
    for (int s = 0; s < options.seeds; ++s) jobs.emplace_back(all[i], s);
  }

  std::vector<SolveRecord> out(jobs.size());
  const std::size_t batch = static_cast<std::size_t>(options.workers) * 4;
  for (std::size_t start = 0; start < jobs.size(); start += batch) {
    const std::size_t end = std::min(jobs.size(), start + batch);
    parallel_for(static_cast<int>(end - start), options.workers, [&](int i) {
      const auto& [t, s] = jobs[start + static_cast<std::size_t>(i)];
      DEConfig cfg = options.config;
      cfg.workers = 1;
      cfg.seed = derive_seed(options.config.seed, static_cast<std::uint64_t>(t.id),
                             static_cast<std::uint64_t>(s));
      SolveRecord rec = solve_target(params, t, options.problem, cfg);
      rec.seed_index = s;
      out[start + static_cast<std::size_t>(i)] = std::move(rec);
    });
    if (progress) {
      for (std::size_t k = start; k < end; ++k) progress(out[k]);
    }
  }
  return out;
}

PreMotionLibrary library_from_records(const std::vector<SolveRecord>& records) {
  PreMotionLibrary lib;
  for (const auto& r : records) {
    if (r.seed_index != 0 || !r.feasible) continue;
    PreMotionEntry e;
    e.id = r.id;
    e.target = r.p;
    e.mode = r.mode;
    e.s_pre = r.best;
    e.fitness = r.fitness;
    e.generations = r.generations;
    lib.add(std::move(e));
  }
  return lib;
}

double generations_to_feasibility(const SolveRecord& r) {
  return r.generations_to_feasible >= 0 ? r.generations_to_feasible : r.generations;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<DirectionStats> summarize(const std::vector<SolveRecord>& records) {
  std::vector<DirectionStats> out;
  for (int d = 0; d <= static_cast<int>(Direction::Vertical); ++d) {
    const auto dir = static_cast<Direction>(d);
    std::vector<double> gens, walls;
    DirectionStats st;
    st.direction = dir;
    for (const auto& r : records) {
      if (r.direction != dir) continue;
      ++st.attempted;
      if (r.success) ++st.succeeded;
      gens.push_back(generations_to_feasibility(r));
      walls.push_back(r.wall_time);
    }
    if (st.attempted == 0) continue;
    st.median_generations = median(gens);
    st.median_wall = median(walls);
    double sum = 0.0;
    for (double w : walls) sum += w;
    st.mean_wall = sum / static_cast<double>(walls.size());
    out.push_back(st);
  }
  return out;
}

std::vector<PairedRecord> run_paired(const RobotParams& params, const PreMotionLibrary& library,
                                     const PairedOptions& options) {
  options.cold.validate();
  options.warm.validate();
  if (options.count < 0) throw std::invalid_argument("count must be non-negative");
  if (!(options.radius > 0.0)) throw std::invalid_argument("radius must be positive");

  std::vector<const PreMotionEntry*> pool;
  for (const auto& e : library.entries()) {
    if (e.mode == options.mode) pool.push_back(&e);
  }
  if (pool.empty() && options.count > 0) {
    throw std::invalid_argument(std::string("library has no ") + mode_name(options.mode) + " entries");
  }

  // Targets are drawn up front from one stream so the set is independent of workers.
  Rng rng = Rng::derive(options.seed, 0xFFFFFFFFu, 1);
  std::vector<PairedRecord> out(static_cast<std::size_t>(options.count));
  for (int i = 0; i < options.count; ++i) {
    const PreMotionEntry* e = pool[rng.below(pool.size())];
    Eigen::Vector3d dir;
    do {
      dir = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    } while (dir.squaredNorm() > 1.0);
    PairedRecord& rec = out[static_cast<std::size_t>(i)];
    rec.index = i;
    // 0.9 keeps the target strictly inside the lookup ball.
    rec.p = e->target + 0.9 * options.radius * dir;
  }

  parallel_for(options.count, options.workers, [&](int i) {
    PairedRecord& rec = out[static_cast<std::size_t>(i)];
    GridTarget t{i, options.mode, rec.p};
    const std::uint64_t seed = derive_seed(options.seed, static_cast<std::uint64_t>(i), 0);
    DEConfig cold = options.cold;
    cold.workers = 1;
    cold.seed = seed;
    rec.cold = solve_target(params, t, options.problem, cold);
    std::optional<OptVector> warm;
    if (const PreMotionEntry* hit = library.lookup(rec.p, options.mode, options.radius)) {
      rec.library_id = hit->id;
      rec.distance = (hit->target - rec.p).norm();
      warm = hit->s_pre;
    }
    DEConfig wc = options.warm;
    wc.workers = 1;
    wc.seed = seed;
    rec.warm = solve_target(params, t, options.problem, wc, warm);
  });
  return out;
}

std::string records_csv(const std::vector<SolveRecord>& records) {
  std::string s =
      "id,seed,mode,x,y,z,direction,feasible,success,fitness,landing_error,generations,"
      "generations_to_feasible,failure\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%lld,%d,%s,%.6f,%.6f,%.6f,%s,%d,%d,%.9e,%.9e,%d,%d,",
                  static_cast<long long>(r.id), r.seed_index, mode_name(r.mode), r.p.x(), r.p.y(),
                  r.p.z(), direction_name(r.direction), r.feasible ? 1 : 0, r.success ? 1 : 0,
                  r.fitness, r.landing_error, r.generations, r.generations_to_feasible);
    s += buf;
    s += sanitize(r.failure);
    s += '\n';
  }
  return s;
}

std::string summary_csv(const std::vector<DirectionStats>& stats, bool with_timing) {
  std::string s = "direction,attempted,succeeded,success_rate,median_generations";
  s += with_timing ? ",mean_wall_s,median_wall_s\n" : "\n";
  char buf[256];
  for (const auto& st : stats) {
    const double rate = st.attempted ? 100.0 * st.succeeded / st.attempted : 0.0;
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%.2f,%.1f", direction_name(st.direction), st.attempted,
                  st.succeeded, rate, st.median_generations);
    s += buf;
    if (with_timing) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f", st.mean_wall, st.median_wall);
      s += buf;
    }
    s += '\n';
  }
  return s;
}

std::string paired_csv(const std::vector<PairedRecord>& records, bool with_timing) {
  std::string s =
      "index,x,y,z,library_id,distance,cold_success,cold_generations_to_feasible,"
      "warm_success,warm_generations_to_feasible";
  s += with_timing ? ",cold_wall_s,warm_wall_s\n" : "\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%lld,%.6f,%d,%d,%d,%d", r.index, r.p.x(),
                  r.p.y(), r.p.z(), static_cast<long long>(r.library_id), r.distance,
                  r.cold.success ? 1 : 0, r.cold.generations_to_feasible, r.warm.success ? 1 : 0,
                  r.warm.generations_to_feasible);
    s += buf;
    if (with_timing) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f", r.cold.wall_time, r.warm.wall_time);
      s += buf;
    }
    s += '\n';
  }
  return s;
}

}  // namespace omnijump
