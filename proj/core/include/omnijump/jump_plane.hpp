#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace omnijump {

class PlaneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One stance edge (f_m, f_l) cut by the jumping plane, legs numbered 1..4.
struct PlaneEdge {
  int m = 1;
  int l = 2;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // intersection, body frame
  double s = 0.0;       // signed coordinate along J
  double lambda = 0.0;  // barycentric position from f_m (0) to f_l (1)
};

struct JumpPlaneSpec {
  double theta_tg = 0.0;  // [0, 2pi)
  int case_index = 4;     // 1 left, 2 rear, 3 right, 4 front
  PlaneEdge j1;           // leading edge (+J side)
  PlaneEdge j2;           // trailing edge
  Eigen::Vector3d axis_j = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_n = Eigen::Vector3d::UnitY();  // z x J
  std::array<double, 4> foot_azimuth{};               // [0, 2pi)
  bool yaw_requested = false;
};

/// Planned resultants at the two plane/edge intersections, N.
struct ResultantForces {
  double u_j1 = 0.0;
  double u_j2 = 0.0;
  double u_z1 = 0.0;
  double u_z2 = 0.0;
};

double azimuth(double x, double y);

/// Sector lookup on the foot azimuths: returns 1..4.
int plane_case(double theta, const std::array<double, 4>& foot_azimuth);

/// `stance_feet` are body-frame foot positions relative to the CoM, legs 1..4
/// (front-left, front-right, rear-left, rear-right). Throws PlaneError for a
/// degenerate stance, a zero horizontal target without `vertical`, or a plane
/// that misses the selected edges.
JumpPlaneSpec build_plane(const Eigen::Vector3d& p_tg, double yaw,
                          std::span<const Eigen::Vector3d> stance_feet, bool vertical = false);

/// Same plane for an explicitly chosen azimuth.
JumpPlaneSpec build_plane_at(double theta_tg, std::span<const Eigen::Vector3d> stance_feet);

/// Per-foot forces (f_x, f_y, f_z), legs 1..4.
std::array<Eigen::Vector3d, 4> decompose(const ResultantForces& u, const JumpPlaneSpec& spec,
                                         std::span<const Eigen::Vector3d> stance_feet);

/// Sum of r_i x f_i about p_com.
Eigen::Vector3d com_torque_check(std::span<const Eigen::Vector3d> forces,
                                 std::span<const Eigen::Vector3d> foot_positions,
                                 const Eigen::Vector3d& p_com);

}  // namespace omnijump
