#include "omnijump/jump_plane.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace omnijump {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEdgeTol = 1e-9;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Half-open sector (lo, hi] on the circle.
bool in_sector(double theta, double lo, double hi) {
  if (lo <= hi) return theta > lo && theta <= hi;
  return theta > lo || theta <= hi;
}

void check_stance(std::span<const Eigen::Vector3d> feet) {
  if (feet.size() != 4) throw PlaneError("stance must have exactly four feet");
  for (const auto& f : feet)
    if (!f.allFinite()) throw PlaneError("stance foot position is not finite");
  // Feet 1,3,4,2 walk the support polygon counter-clockwise.
  const std::array<int, 4> ring{0, 2, 3, 1};
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector2d a = feet[ring[k]].head<2>();
    const Eigen::Vector2d b = feet[ring[(k + 1) % 4]].head<2>();
    const Eigen::Vector2d c = feet[ring[(k + 2) % 4]].head<2>();
    if (cross2(b - a, c - b) <= 1e-9)
      throw PlaneError("degenerate stance: feet are collinear or the polygon is not convex");
  }
}

PlaneEdge cut_edge(int m, int l, const Eigen::Vector2d& dir,
                   std::span<const Eigen::Vector3d> feet, bool leading) {
  const Eigen::Vector3d& pm = feet[m - 1];
  const Eigen::Vector3d& pl = feet[l - 1];
  const Eigen::Vector2d e = (pl - pm).head<2>();
  if (e.norm() < 1e-12) throw PlaneError("coincident feet on a stance edge");
  // origin + s dir = pm + lambda e
  const double det = cross2(e, dir);
  if (std::abs(det) < 1e-15) throw PlaneError("jumping plane is parallel to a stance edge");
  const Eigen::Vector2d pm2 = pm.head<2>();
  const double s = cross2(e, -pm2) / -det;
  const double lambda = cross2(dir, pm2) / det;
  if (lambda < -kEdgeTol || lambda > 1.0 + kEdgeTol || (leading ? s < 0.0 : s > 0.0))
    throw PlaneError("jumping plane misses the stance polygon edge (" + std::to_string(m) +
                     "," + std::to_string(l) + ")");
  PlaneEdge edge;
  edge.m = m;
  edge.l = l;
  edge.lambda = std::clamp(lambda, 0.0, 1.0);
  edge.point = pm + edge.lambda * (pl - pm);
  edge.s = s;
  return edge;
}

}  // namespace

double azimuth(double x, double y) {
  double a = std::atan2(y, x);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

int plane_case(double theta, const std::array<double, 4>& az) {
  if (in_sector(theta, az[0], az[2])) return 1;  // left
  if (in_sector(theta, az[2], az[3])) return 2;  // rear
  if (in_sector(theta, az[3], az[1])) return 3;  // right
  return 4;                                      // front, absorbs the wrap
}

JumpPlaneSpec build_plane_at(double theta_tg, std::span<const Eigen::Vector3d> stance_feet) {
  check_stance(stance_feet);
  JumpPlaneSpec spec;
  spec.theta_tg = azimuth(std::cos(theta_tg), std::sin(theta_tg));
  for (int i = 0; i < 4; ++i)
    spec.foot_azimuth[i] = azimuth(stance_feet[i].x(), stance_feet[i].y());
  spec.case_index = plane_case(spec.theta_tg, spec.foot_azimuth);

  static constexpr std::array<std::array<int, 4>, 4> kEdges{{
      {1, 3, 2, 4},  // left: J1 on (1,3), J2 on (2,4)
      {3, 4, 1, 2},  // rear
      {2, 4, 1, 3},  // right
      {1, 2, 3, 4},  // front
  }};
  const auto& e = kEdges[spec.case_index - 1];
  const Eigen::Vector2d dir(std::cos(spec.theta_tg), std::sin(spec.theta_tg));
  spec.axis_j = Eigen::Vector3d(dir.x(), dir.y(), 0.0);
  spec.axis_n = Eigen::Vector3d::UnitZ().cross(spec.axis_j);
  spec.j1 = cut_edge(e[0], e[1], dir, stance_feet, true);
  spec.j2 = cut_edge(e[2], e[3], dir, stance_feet, false);
  return spec;
}

JumpPlaneSpec build_plane(const Eigen::Vector3d& p_tg, double yaw,
                          std::span<const Eigen::Vector3d> stance_feet, bool vertical) {
  if (!p_tg.allFinite() || !std::isfinite(yaw)) throw PlaneError("target is not finite");
  const double horizontal = p_tg.head<2>().norm();
  double theta = 0.0;
  if (horizontal > 1e-9) {
    theta = std::atan2(p_tg.y(), p_tg.x());
  } else if (!vertical) {
    throw PlaneError(
        "degenerate target: zero horizontal displacement defines no jumping plane "
        "(request a vertical jump explicitly)");
  }
  JumpPlaneSpec spec = build_plane_at(theta, stance_feet);
  spec.yaw_requested = std::abs(yaw) > 0.0;
  return spec;
}

std::array<Eigen::Vector3d, 4> decompose(const ResultantForces& u, const JumpPlaneSpec& spec,
                                         std::span<const Eigen::Vector3d> stance_feet) {
  if (stance_feet.size() != 4) throw PlaneError("stance must have exactly four feet");
  std::array<Eigen::Vector3d, 4> out;
  out.fill(Eigen::Vector3d::Zero());
  const double c = std::cos(spec.theta_tg);
  const double s = std::sin(spec.theta_tg);

  auto split = [&](const PlaneEdge& edge, double u_j, double u_z) {
    const Eigen::Vector3d& pm = stance_feet[edge.m - 1];
    const Eigen::Vector3d& pl = stance_feet[edge.l - 1];
    const double len = (pm - pl).head<2>().norm();
    if (len < 1e-12) throw PlaneError("coincident feet on a stance edge");
    const double ratio = (edge.point - pm).head<2>().norm() / len;
    const double fj_l = u_j * ratio;
    const double fz_l = u_z * ratio;
    out[edge.l - 1] += Eigen::Vector3d(fj_l * c, fj_l * s, fz_l);
    out[edge.m - 1] += Eigen::Vector3d((u_j - fj_l) * c, (u_j - fj_l) * s, u_z - fz_l);
  };
  split(spec.j1, u.u_j1, u.u_z1);
  split(spec.j2, u.u_j2, u.u_z2);
  return out;
}

Eigen::Vector3d com_torque_check(std::span<const Eigen::Vector3d> forces,
                                 std::span<const Eigen::Vector3d> foot_positions,
                                 const Eigen::Vector3d& p_com) {
  if (forces.size() != foot_positions.size())
    throw PlaneError("com_torque_check: force/position count mismatch");
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < forces.size(); ++i)
    tau += (foot_positions[i] - p_com).cross(forces[i]);
  return tau;
}

}  // namespace omnijump
