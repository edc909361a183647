#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnijump {

/// Plane n^T p + d = 0 with unit n.
struct PlanePatch {
  Eigen::Vector3d n = Eigen::Vector3d::UnitZ();
  double d = 0.0;
};

struct PlanarPatchMap {
  std::vector<PlanePatch> patches;

  /// Throws std::invalid_argument for an empty map or a normal off unit length by > 1e-9.
  void validate() const;
  /// Smallest |n^T p + d| over the patches.
  [[nodiscard]] double residual(const Eigen::Vector3d& p) const;
  /// Index of the patch attaining residual().
  [[nodiscard]] std::size_t nearest(const Eigen::Vector3d& p) const;
};

/// One "nx ny nz d" per line, '#' comments. Throws std::invalid_argument with the line number.
PlanarPatchMap parse_map(const std::string& text);
/// One "x y z" per line, '#' comments.
std::vector<Eigen::Vector3d> parse_points(const std::string& text);

/// Yaw-and-planar-offset hypothesis; z is supplied separately.
struct PoseHypothesis {
  double theta = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct Pose6 {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  [[nodiscard]] Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return r * p + t; }
  static Pose6 from_hypothesis(const PoseHypothesis& b, double z);
};

/// Applies a gravity-levelling rotation to the raw cloud.
std::vector<Eigen::Vector3d> level_points(std::span<const Eigen::Vector3d> points,
                                          const Eigen::Matrix3d& leveling);

/// Points whose best point-to-plane distance is within eps.
int consensus(const PoseHypothesis& b, std::span<const Eigen::Vector3d> points,
              const PlanarPatchMap& map, double eps = 0.1, double z = 0.0);

/// Reference double loop over points x patches for consensus().
int consensus_brute(const PoseHypothesis& b, std::span<const Eigen::Vector3d> points,
                    const PlanarPatchMap& map, double eps = 0.1, double z = 0.0);

struct SearchBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // (theta, x, y)
  Eigen::Vector3d half = Eigen::Vector3d::Zero();    // half-widths, theta half <= pi
  int lower = 0;
  int upper = 0;
};

struct Bounds {
  int lower = 0;
  int upper = 0;
};

/// lower = consensus at the centre; upper relaxes each point's threshold by
/// 2 sin(u_theta/2)|p| + sqrt(u_x^2 + u_y^2) with the box's half-widths.
Bounds box_bounds(const SearchBox& box, std::span<const Eigen::Vector3d> points,
                  const PlanarPatchMap& map, double eps = 0.1, double z = 0.0);

struct BnbConfig {
  double eps = 0.1;
  double z = 0.0;
  Eigen::Vector3d root_center = Eigen::Vector3d::Zero();
  Eigen::Vector3d root_half{3.14159265358979323846, 2.0, 2.0};
  double min_theta_width = 3.14159265358979323846 / 180.0;  // full width, rad
  double min_xy_width = 0.02;                               // full width, m
  std::int64_t max_nodes = 5'000'000;
};

struct BnbResult {
  PoseHypothesis best;
  int inliers = 0;    // consensus at best
  int optimum = 0;    // largest consensus seen at any box centre
  double ssr = 0.0;   // squared inlier residuals at best
  std::int64_t candidates = 0;  // terminal boxes not excluded by their upper bound
  std::int64_t nodes_expanded = 0;
  bool exhausted = true;  // false when max_nodes stopped the search
  Eigen::Vector3d terminal_half = Eigen::Vector3d::Zero();
};

/// Best-first branch and bound on consensus. Boxes are split along every
/// dimension still wider than its resolution; a box is discarded only when its
/// upper bound is strictly below the incumbent, so equal-count plateaus are
/// resolved to terminal size. The answer is the centre of the terminal box,
/// among those whose upper bound reaches the optimum, with the smallest
/// truncated quadratic sum of min(r^2, eps^2); ties go to the lexicographically
/// smaller centre. Throws std::invalid_argument for empty inputs.
BnbResult bnb_search(std::span<const Eigen::Vector3d> points, const PlanarPatchMap& map,
                     const BnbConfig& config = {});

class DegeneracyError : public std::runtime_error {
 public:
  DegeneracyError(std::vector<std::string> directions);
  [[nodiscard]] const std::vector<std::string>& directions() const { return directions_; }

 private:
  std::vector<std::string> directions_;
};

struct PosePrior {
  Pose6 measurement;
  Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Identity();  // (rot, trans)
};

struct RefineConfig {
  int max_iterations = 50;
  double huber = 0.1;  // robust kernel scale, m
  double lambda = 1e-4;
  std::optional<PosePrior> prior;
};

struct RefineResult {
  Pose6 pose;
  double cost = 0.0;
  int iterations = 0;
  std::vector<double> cost_history;  // initial cost then one per accepted step
  bool converged = false;
};

/// Levenberg-Marquardt over Huber point-to-plane residuals, pose updated on the
/// left. Throws DegeneracyError naming the unconstrained axes (rx ry rz tx ty tz)
/// when the normal equations are rank deficient at the seed.
RefineResult refine_pose(const Pose6& seed, std::span<const Eigen::Vector3d> points,
                         const PlanarPatchMap& map, const RefineConfig& config = {});

/// Robust cost used by refine_pose (without the prior).
double point_to_plane_cost(const Pose6& pose, std::span<const Eigen::Vector3d> points,
                           const PlanarPatchMap& map, double huber);

struct NoiseFloor {
  double translation = 0.0;  // m, sqrt of the trace of the translation covariance
  double rotation = 0.0;     // rad
};

/// Cramer-Rao style floor sigma^2 (J^T J)^-1 at `pose` for isotropic point noise sigma.
NoiseFloor noise_floor(const Pose6& pose, std::span<const Eigen::Vector3d> points,
                       const PlanarPatchMap& map, double sigma);

/// Rotation angle of a * b^T, rad.
double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

struct SceneOptions {
  int points = 1500;
  double outlier_fraction = 0.0;
  double noise = 0.0;  // isotropic Gaussian sigma on inlier points, m
  int min_walls = 4;
  int max_walls = 14;
  double z = 0.3;
  double outlier_clearance = 0.1;  // m; closer draws would be inliers at the true pose
};

/// Floor plus random vertical walls 1.5-4 m away, a yaw-and-offset truth pose
/// and a body-frame cloud sampled from the map; outliers are uniform in a box,
/// redrawn while they lie within outlier_clearance of any patch at the true pose.
struct SyntheticScene {
  PlanarPatchMap map;
  std::vector<Eigen::Vector3d> points;  // body frame
  std::vector<bool> outlier;
  PoseHypothesis truth;
  double z = 0.0;
};

SyntheticScene synthetic_scene(std::uint64_t seed, const SceneOptions& options = {});

}  // namespace omnijump
