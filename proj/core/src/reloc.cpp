#include "omnijump/reloc.hpp"

#include "omnijump/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace omnijump {

namespace {

Eigen::Matrix3d rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double a = w.norm();
  if (a < 1e-14) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

std::vector<std::vector<double>> parse_rows(const std::string& text, std::size_t fields,
                                            const char* what) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      double v = 0.0;
      const char* b = tok.data();
      const char* e = b + tok.size();
      if (b != e && *b == '+') ++b;
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " line " + std::to_string(ln) +
                                    ": bad number '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (row.size() != fields)
      throw std::invalid_argument(std::string(what) + " line " + std::to_string(ln) + ": expected " +
                                  std::to_string(fields) + " numbers, got " +
                                  std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_inputs(std::span<const Eigen::Vector3d> points, const PlanarPatchMap& map) {
  map.validate();
  if (points.empty()) throw std::invalid_argument("point cloud is empty");
}

struct BoxEval {
  int lower = 0;
  int upper = 0;
  double ssr = 0.0;
  double msac = 0.0;  // sum of min(r^2, eps^2)
};

BoxEval eval_box(const Eigen::Vector3d& center, const Eigen::Vector3d& half,
                 std::span<const Eigen::Vector3d> points, std::span<const double> norms,
                 const PlanarPatchMap& map, double eps, double z) {
  const Eigen::Matrix3d r = rot_z(center[0]);
  const Eigen::Vector3d t(center[1], center[2], z);
  const double rot = 2.0 * std::sin(std::min(half[0], std::numbers::pi) / 2.0);
  const double trans = std::hypot(half[1], half[2]);
  BoxEval out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double res = map.residual(r * points[i] + t);
    if (res <= eps) {
      ++out.lower;
      out.ssr += res * res;
      out.msac += res * res;
    } else {
      out.msac += eps * eps;
    }
    if (res <= eps + rot * norms[i] + trans) ++out.upper;
  }
  return out;
}

}  // namespace

void PlanarPatchMap::validate() const {
  if (patches.empty()) throw std::invalid_argument("plane map is empty");
  for (std::size_t j = 0; j < patches.size(); ++j) {
    const auto& p = patches[j];
    if (!p.n.allFinite() || !std::isfinite(p.d))
      throw std::invalid_argument("plane " + std::to_string(j) + " is not finite");
    if (std::abs(p.n.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("plane " + std::to_string(j) + " normal is not unit length");
  }
}

double PlanarPatchMap::residual(const Eigen::Vector3d& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pl : patches) best = std::min(best, std::abs(pl.n.dot(p) + pl.d));
  return best;
}

std::size_t PlanarPatchMap::nearest(const Eigen::Vector3d& p) const {
  std::size_t best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < patches.size(); ++j) {
    const double r = std::abs(patches[j].n.dot(p) + patches[j].d);
    if (r < best_r) {
      best_r = r;
      best = j;
    }
  }
  return best;
}

PlanarPatchMap parse_map(const std::string& text) {
  PlanarPatchMap map;
  for (const auto& row : parse_rows(text, 4, "map")) {
    PlanePatch p;
    p.n = Eigen::Vector3d(row[0], row[1], row[2]);
    const double len = p.n.norm();
    if (!(len > 0.0)) throw std::invalid_argument("map: zero normal");
    // Accept normals written with a few digits; the offset scales with them.
    p.n /= len;
    p.d = row[3] / len;
    map.patches.push_back(p);
  }
  map.validate();
  return map;
}

std::vector<Eigen::Vector3d> parse_points(const std::string& text) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& row : parse_rows(text, 3, "points")) out.emplace_back(row[0], row[1], row[2]);
  return out;
}

Pose6 Pose6::from_hypothesis(const PoseHypothesis& b, double z) {
  return Pose6{rot_z(b.theta), Eigen::Vector3d(b.x, b.y, z)};
}

std::vector<Eigen::Vector3d> level_points(std::span<const Eigen::Vector3d> points,
                                          const Eigen::Matrix3d& leveling) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(leveling * p);
  return out;
}

int consensus(const PoseHypothesis& b, std::span<const Eigen::Vector3d> points,
              const PlanarPatchMap& map, double eps, double z) {
  check_inputs(points, map);
  const Pose6 pose = Pose6::from_hypothesis(b, z);
  int count = 0;
  for (const auto& p : points)
    if (map.residual(pose.apply(p)) <= eps) ++count;
  return count;
}

int consensus_brute(const PoseHypothesis& b, std::span<const Eigen::Vector3d> points,
                    const PlanarPatchMap& map, double eps, double z) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  int count = 0;
  for (const auto& p : points) {
    const double x = c * p.x() - s * p.y() + b.x;
    const double y = s * p.x() + c * p.y() + b.y;
    const double w = p.z() + z;
    bool inlier = false;
    for (const auto& pl : map.patches)
      if (std::abs(pl.n.x() * x + pl.n.y() * y + pl.n.z() * w + pl.d) <= eps) inlier = true;
    count += inlier ? 1 : 0;
  }
  return count;
}

Bounds box_bounds(const SearchBox& box, std::span<const Eigen::Vector3d> points,
                  const PlanarPatchMap& map, double eps, double z) {
  check_inputs(points, map);
  if (!(box.half.array() >= 0.0).all()) throw std::invalid_argument("box half-widths must be >= 0");
  std::vector<double> norms(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) norms[i] = points[i].norm();
  const BoxEval e = eval_box(box.center, box.half, points, norms, map, eps, z);
  return Bounds{e.lower, e.upper};
}

BnbResult bnb_search(std::span<const Eigen::Vector3d> points, const PlanarPatchMap& map,
                     const BnbConfig& config) {
  check_inputs(points, map);
  if (!(config.eps > 0.0) || !(config.min_theta_width > 0.0) || !(config.min_xy_width > 0.0) ||
      !(config.root_half.array() > 0.0).all())
    throw std::invalid_argument("bnb_search: eps, resolutions and root half-widths must be positive");

  std::vector<double> norms(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) norms[i] = points[i].norm();
  const Eigen::Vector3d min_width(config.min_theta_width, config.min_xy_width, config.min_xy_width);

  struct Node {
    SearchBox box;
    std::int64_t seq;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.box.upper != b.box.upper) return a.box.upper < b.box.upper;
    if (a.box.lower != b.box.lower) return a.box.lower < b.box.lower;
    return a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> queue(worse);

  BnbResult best;
  best.inliers = -1;
  auto consider = [&](const Eigen::Vector3d& c, const BoxEval& e) {
    bool better = e.lower > best.inliers;
    if (!better && e.lower == best.inliers) {
      if (e.ssr != best.ssr) {
        better = e.ssr < best.ssr;
      } else {
        const Eigen::Vector3d b(best.best.theta, best.best.x, best.best.y);
        better = std::lexicographical_compare(c.data(), c.data() + 3, b.data(), b.data() + 3);
      }
    }
    if (better) {
      best.best = PoseHypothesis{c[0], c[1], c[2]};
      best.inliers = e.lower;
      best.ssr = e.ssr;
    }
  };

  std::int64_t seq = 0;
  {
    SearchBox root{config.root_center, config.root_half, 0, 0};
    const BoxEval e = eval_box(root.center, root.half, points, norms, map, config.eps, config.z);
    root.lower = e.lower;
    root.upper = e.upper;
    consider(root.center, e);
    queue.push(Node{root, seq++});
  }

  struct Terminal {
    Eigen::Vector3d center;
    int lower;
    int upper;
    double ssr;
    double msac;
  };
  std::vector<Terminal> terminals;
  Eigen::Vector3d terminal = config.root_half;
  while (!queue.empty()) {
    const Node node = queue.top();
    queue.pop();
    if (node.box.upper < best.inliers) break;
    const Eigen::Vector3d width = 2.0 * node.box.half;
    const bool split[3] = {width[0] > min_width[0], width[1] > min_width[1], width[2] > min_width[2]};
    if (!split[0] && !split[1] && !split[2]) {
      terminal = terminal.cwiseMin(node.box.half);
      const BoxEval e = eval_box(node.box.center, node.box.half, points, norms, map, config.eps, config.z);
      terminals.push_back(Terminal{node.box.center, e.lower, e.upper, e.ssr, e.msac});
      continue;
    }
    if (best.nodes_expanded >= config.max_nodes) {
      best.exhausted = false;
      break;
    }
    ++best.nodes_expanded;

    Eigen::Vector3d half = node.box.half;
    for (int d = 0; d < 3; ++d)
      if (split[d]) half[d] *= 0.5;
    for (int cx = 0; cx < (split[0] ? 2 : 1); ++cx)
      for (int cy = 0; cy < (split[1] ? 2 : 1); ++cy)
        for (int cz = 0; cz < (split[2] ? 2 : 1); ++cz) {
          const int pick[3] = {cx, cy, cz};
          Eigen::Vector3d c = node.box.center;
          for (int d = 0; d < 3; ++d)
            if (split[d]) c[d] += (pick[d] == 0 ? -1.0 : 1.0) * half[d];
          const BoxEval e = eval_box(c, half, points, norms, map, config.eps, config.z);
          consider(c, e);
          if (e.upper < best.inliers) continue;
          queue.push(Node{SearchBox{c, half, e.lower, e.upper}, seq++});
        }
  }
  best.terminal_half = terminal;

  // Every terminal box whose upper bound reaches the optimum may hold it; pick
  // the one whose centre fits best under the truncated quadratic.
  const Terminal* pick = nullptr;
  for (const auto& t : terminals) {
    if (t.upper < best.inliers) continue;
    if (!pick || t.msac < pick->msac ||
        (t.msac == pick->msac &&
         std::lexicographical_compare(t.center.data(), t.center.data() + 3, pick->center.data(),
                                      pick->center.data() + 3)))
      pick = &t;
  }
  best.candidates = 0;
  for (const auto& t : terminals) best.candidates += t.upper >= best.inliers ? 1 : 0;
  best.optimum = best.inliers;
  if (pick && best.exhausted) {
    best.best = PoseHypothesis{pick->center[0], pick->center[1], pick->center[2]};
    best.inliers = pick->lower;
    best.ssr = pick->ssr;
  }
  return best;
}

DegeneracyError::DegeneracyError(std::vector<std::string> directions)
    : std::runtime_error([&] {
        std::string s = "degenerate geometry: unconstrained directions";
        for (const auto& d : directions) s += " " + d;
        return s;
      }()),
      directions_(std::move(directions)) {}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct Normal {
  Mat6 h = Mat6::Zero();
  Vec6 g = Vec6::Zero();
  double cost = 0.0;
};

double huber_rho(double r, double k) {
  const double a = std::abs(r);
  return a <= k ? 0.5 * r * r : k * a - 0.5 * k * k;
}

Vec6 prior_error(const Pose6& pose, const PosePrior& prior) {
  Vec6 e;
  e.head<3>() = so3_log(pose.r * prior.measurement.r.transpose());
  e.tail<3>() = pose.t - prior.measurement.t;
  return e;
}

double prior_cost(const Pose6& pose, const std::optional<PosePrior>& prior, const Mat6& info) {
  if (!prior) return 0.0;
  const Vec6 e = prior_error(pose, *prior);
  return 0.5 * e.dot(info * e);
}

Normal build_normal(const Pose6& pose, std::span<const Eigen::Vector3d> points,
                    const PlanarPatchMap& map, double k, const std::optional<PosePrior>& prior,
                    const Mat6& info) {
  Normal ne;
  for (const auto& p : points) {
    const Eigen::Vector3d q = pose.apply(p);
    const PlanePatch& pl = map.patches[map.nearest(q)];
    const double r = pl.n.dot(q) + pl.d;
    Vec6 j;
    j.head<3>() = q.cross(pl.n);
    j.tail<3>() = pl.n;
    const double w = std::abs(r) <= k ? 1.0 : k / std::abs(r);
    ne.h.noalias() += w * j * j.transpose();
    ne.g.noalias() += w * r * j;
    ne.cost += huber_rho(r, k);
  }
  if (prior) {
    const Vec6 e = prior_error(pose, *prior);
    ne.h += info;
    ne.g += info * e;
    ne.cost += 0.5 * e.dot(info * e);
  }
  return ne;
}

Pose6 retract(const Pose6& pose, const Vec6& delta) {
  const Eigen::Matrix3d dr = so3_exp(delta.head<3>());
  return Pose6{dr * pose.r, dr * pose.t + delta.tail<3>()};
}

Mat6 jtj(const Pose6& pose, std::span<const Eigen::Vector3d> points, const PlanarPatchMap& map) {
  Mat6 h = Mat6::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d q = pose.apply(p);
    const PlanePatch& pl = map.patches[map.nearest(q)];
    Vec6 j;
    j.head<3>() = q.cross(pl.n);
    j.tail<3>() = pl.n;
    h.noalias() += j * j.transpose();
  }
  return h;
}

}  // namespace

double point_to_plane_cost(const Pose6& pose, std::span<const Eigen::Vector3d> points,
                           const PlanarPatchMap& map, double huber) {
  double c = 0.0;
  for (const auto& p : points) {
    const Eigen::Vector3d q = pose.apply(p);
    const PlanePatch& pl = map.patches[map.nearest(q)];
    c += huber_rho(pl.n.dot(q) + pl.d, huber);
  }
  return c;
}

RefineResult refine_pose(const Pose6& seed, std::span<const Eigen::Vector3d> points,
                         const PlanarPatchMap& map, const RefineConfig& config) {
  check_inputs(points, map);
  if (!(config.huber > 0.0) || config.max_iterations < 0 || !(config.lambda > 0.0))
    throw std::invalid_argument("refine_pose: huber and lambda must be positive");

  // Observability of the point term alone, with rotations scaled to metres.
  {
    double scale = 0.0;
    for (const auto& p : points) scale += seed.apply(p).squaredNorm();
    scale = std::max(1.0, std::sqrt(scale / static_cast<double>(points.size())));
    Mat6 h = jtj(seed, points, map);
    Vec6 s;
    s << 1.0 / scale, 1.0 / scale, 1.0 / scale, 1.0, 1.0, 1.0;
    h = s.asDiagonal() * h * s.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Mat6> es(h);
    const double top = es.eigenvalues().maxCoeff();
    std::vector<int> null;
    for (int i = 0; i < 6; ++i)
      if (!(es.eigenvalues()[i] > 1e-9 * top)) null.push_back(i);
    if (!null.empty() && !config.prior) {
      static const char* kAxis[6] = {"rx", "ry", "rz", "tx", "ty", "tz"};
      Eigen::MatrixXd basis(6, static_cast<Eigen::Index>(null.size()));
      for (std::size_t c = 0; c < null.size(); ++c)
        basis.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(null[c]);
      std::vector<std::string> names;
      for (int a = 0; a < 6; ++a)
        if (basis.row(a).squaredNorm() > 0.5) names.emplace_back(kAxis[a]);
      if (names.size() < null.size()) {
        names.clear();
        for (std::size_t c = 0; c < null.size(); ++c) {
          std::string d;
          char buf[32];
          for (int a = 0; a < 6; ++a) {
            const double v = basis(a, static_cast<Eigen::Index>(c));
            if (std::abs(v) < 0.1) continue;
            std::snprintf(buf, sizeof buf, "%+.2f*%s", v, kAxis[a]);
            d += buf;
          }
          names.push_back(d);
        }
      }
      throw DegeneracyError(names);
    }
  }

  Mat6 info = Mat6::Zero();
  if (config.prior) info = config.prior->covariance.inverse();

  RefineResult out;
  out.pose = seed;
  double lambda = config.lambda;
  Normal ne = build_normal(out.pose, points, map, config.huber, config.prior, info);
  out.cost = ne.cost;
  out.cost_history.push_back(out.cost);
  for (int it = 0; it < config.max_iterations; ++it) {
    out.iterations = it + 1;
    if (ne.g.norm() < 1e-14 * (1.0 + out.cost) || ne.cost < 1e-24) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    Vec6 step = Vec6::Zero();
    while (lambda < 1e12) {
      Mat6 a = ne.h;
      a.diagonal() += lambda * ne.h.diagonal().cwiseMax(1e-12);
      step = a.ldlt().solve(-ne.g);
      const Pose6 trial = retract(out.pose, step);
      const double c = point_to_plane_cost(trial, points, map, config.huber) +
                       prior_cost(trial, config.prior, info);
      if (std::isfinite(c) && c <= out.cost) {
        out.pose = trial;
        const double drop = out.cost - c;
        out.cost = c;
        out.cost_history.push_back(c);
        lambda = std::max(1e-12, lambda * 0.1);
        accepted = true;
        if (drop <= 1e-15 * (1.0 + c) || step.norm() < 1e-12) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    if (out.converged) break;
    ne = build_normal(out.pose, points, map, config.huber, config.prior, info);
  }
  return out;
}

NoiseFloor noise_floor(const Pose6& pose, std::span<const Eigen::Vector3d> points,
                       const PlanarPatchMap& map, double sigma) {
  check_inputs(points, map);
  const Mat6 h = jtj(pose, points, map);
  const Mat6 cov = sigma * sigma * h.inverse();
  // Left perturbation: the translation error is rho - t x phi.
  Eigen::Matrix<double, 3, 6> a;
  a.leftCols<3>() = -skew(pose.t);
  a.rightCols<3>() = Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d ct = a * cov * a.transpose();
  return NoiseFloor{std::sqrt(ct.trace()), std::sqrt(cov.topLeftCorner<3, 3>().trace())};
}

double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return so3_log(a * b.transpose()).norm();
}

SyntheticScene synthetic_scene(std::uint64_t seed, const SceneOptions& options) {
  if (options.points < 1) throw std::invalid_argument("synthetic_scene: points must be positive");
  if (!(options.outlier_fraction >= 0.0 && options.outlier_fraction <= 1.0))
    throw std::invalid_argument("synthetic_scene: outlier fraction must be in [0, 1]");
  if (options.min_walls < 2 || options.max_walls < options.min_walls)
    throw std::invalid_argument("synthetic_scene: need 2 <= min_walls <= max_walls");
  constexpr double kPi = std::numbers::pi;
  Rng rng = Rng::derive(seed, 0, 0);
  SyntheticScene scene;
  scene.z = options.z;
  scene.map.patches.push_back({Eigen::Vector3d::UnitZ(), 0.0});
  const int walls =
      options.min_walls + static_cast<int>(rng.below(static_cast<std::uint64_t>(options.max_walls - options.min_walls + 1)));
  for (int i = 0; i < walls; ++i) {
    const double a = rng.uniform(0.0, 2 * kPi);
    scene.map.patches.push_back({Eigen::Vector3d(std::cos(a), std::sin(a), 0.0), -rng.uniform(1.5, 4.0)});
  }
  scene.truth = {rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
  const Pose6 pose = Pose6::from_hypothesis(scene.truth, scene.z);

  for (int i = 0; i < options.points; ++i) {
    const PlanePatch& pl = scene.map.patches[rng.below(scene.map.patches.size())];
    Eigen::Vector3d world;
    if (pl.n.z() > 0.5) {
      world = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), 0.0};
    } else {
      const Eigen::Vector3d along(-pl.n.y(), pl.n.x(), 0.0);
      world = -pl.d * pl.n + rng.uniform(-2.0, 2.0) * along + rng.uniform(0.0, 2.0) * Eigen::Vector3d::UnitZ();
    }
    Eigen::Vector3d body = pose.r.transpose() * (world - pose.t);
    const bool out = rng.uniform() < options.outlier_fraction;
    if (out) {
      do {
        body = {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0), rng.uniform(-1.0, 2.0)};
      } while (scene.map.residual(pose.apply(body)) <= options.outlier_clearance);
    } else if (options.noise > 0.0) {
      body += options.noise * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    }
    scene.points.push_back(body);
    scene.outlier.push_back(out);
  }
  return scene;
}

}  // namespace omnijump
