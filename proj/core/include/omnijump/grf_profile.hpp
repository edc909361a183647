#pragma once

#include "omnijump/robot_model.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnijump {

enum class JumpMode { Omni, Agile, Humanoid };

const char* mode_name(JumpMode m);
/// Throws std::invalid_argument for anything but omni, agile or humanoid.
JumpMode parse_mode(const std::string& s);

struct PhaseTimes {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;

  [[nodiscard]] bool valid() const { return t1 > 0.0 && t1 <= t2 && t2 < t3; }
};

/// Piecewise-polynomial resultant channels. Quadruped channels are
/// (u_J1, u_J2, u_z1, u_z2); humanoid channels are (f_x, f_z, tau_y) with the
/// fourth slot unused. Phase 1 is a0 + a1 t on [0, t1]; phase 2 is
/// gamma (b0 + b1 t + b2 t^2) on (t1, t2); flight carries no force.
struct GRFProfile {
  JumpMode mode = JumpMode::Omni;
  int gamma = 0;
  std::array<double, 4> a0{};
  std::array<double, 4> a1{};
  std::array<double, 4> b0{};
  std::array<double, 4> b1{};
  std::array<double, 4> b2{};

  [[nodiscard]] int channels() const { return mode == JumpMode::Humanoid ? 3 : 4; }
  /// Concatenated (a0, a1, b0, b1, b2) over the used channels.
  [[nodiscard]] std::vector<double> flat() const;
};

enum class Side { Left, Right };

/// Channel values at t. At t = t1 the Left side takes the linear segment and
/// the Right side the (gamma-masked) quadratic one. Throws std::out_of_range
/// outside [0, t3].
std::array<double, 4> eval_u(const GRFProfile& profile, const PhaseTimes& times, double t,
                             Side side = Side::Left);

/// Decision vector. Layouts:
///   omni     [x, z, theta](t1/2), t1, t3
///   agile    [x, z, theta](t1/2), (t1), (t2), t1, t2, t3
///   humanoid [x, z, theta](0), (t1/2), t1, t3
struct OptVector {
  JumpMode mode = JumpMode::Omni;
  std::vector<double> v;

  static std::size_t dimension(JumpMode m);
  [[nodiscard]] PhaseTimes times() const;
  [[nodiscard]] bool finite() const;
};

/// Zero-padded twelve-dimensional embedding of an omni vector (t2 = t1).
OptVector embed_omni_in_agile(const OptVector& omni);

/// Planar description of the jump used by the transform and the rollout.
struct PlanarJumpModel {
  JumpMode mode = JumpMode::Omni;
  PlanarBody body;
  double dt = 1e-3;
  // Quadruped contacts: J1/J2 intersection coordinates along J, on the ground.
  double s_j1 = 0.0;
  double s_j2 = 0.0;
  // Quadruped start (at rest). Humanoid starts come from the decision vector.
  PlanarState start;
  // Agile: the edge that keeps pushing during phase 2 (2 = trailing edge, default).
  int phase2_edge = 2;
  // Required state at t3 (x, z, theta).
  PlanarState landing;
};

/// Integration grid: phase 1 has an even step count so t1/2 is a grid point.
struct TimeGrid {
  int n1 = 0;
  int n2 = 0;
  double h1 = 0.0;
  double h2 = 0.0;

  [[nodiscard]] int steps() const { return n1 + n2; }
  [[nodiscard]] double time_at(int k) const;
  [[nodiscard]] double step_at(int k) const { return k < n1 ? h1 : h2; }
};

TimeGrid make_grid(const PhaseTimes& times, double dt, bool two_phase);

struct ProfileRollout {
  TimeGrid grid;
  std::vector<PlanarState> states;         // steps() + 1 entries
  std::vector<std::array<double, 4>> u;    // per step channel values
};

/// Integrates the take-off phases under `profile` from `start`.
ProfileRollout rollout_profile(const GRFProfile& profile, const PhaseTimes& times,
                               const PlanarJumpModel& model, const PlanarState& start);

/// Loads equivalent to channel values `u` at one step, for planar_rollout.
PlanarLoad planar_load(const std::array<double, 4>& u, const PlanarJumpModel& model);

/// Torque-free projectile flight of `flight` seconds.
PlanarState ballistic_target(const PlanarState& liftoff, double flight, double g);

class TransformError : public std::runtime_error {
 public:
  TransformError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

struct TransformResult {
  GRFProfile profile;
  PhaseTimes times;
  int newton_iterations = 0;
  double residual = 0.0;
};

/// Solves for the profile whose rollout passes through the waypoints of `opt`
/// and lands on model.landing at t3. Translation is solved linearly, the pitch
/// conditions by damped Newton (at most 20 iterations). Throws TransformError.
TransformResult waypoints_to_profile(const OptVector& opt, const PlanarJumpModel& model);

/// Forward map: rollout of `profile` sampled at the decision-vector waypoints.
OptVector profile_to_waypoints(const GRFProfile& profile, const PhaseTimes& times,
                               const PlanarJumpModel& model, const PlanarState& start);

/// Start state implied by a decision vector (humanoid reads s(0), others use model.start).
PlanarState start_state(const OptVector& opt, const PlanarJumpModel& model);

/// Plain-text record: header line, then one line per channel "a0 a1 b0 b1 b2".
std::string profile_to_text(const GRFProfile& profile, const PhaseTimes& times);
std::pair<GRFProfile, PhaseTimes> profile_from_text(const std::string& text);

}  // namespace omnijump
