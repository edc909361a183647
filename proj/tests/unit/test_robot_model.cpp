#include <doctest.h>

#include <omnijump/robot_model.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

using namespace omnijump;

namespace {

const Eigen::Vector3d kZero = Eigen::Vector3d::Zero();

// Reference planar dynamics integrated with classical RK4.
struct Rk4Body {
  double m, inertia, g;
  std::function<PlanarLoad(double)> load;

  std::array<double, 6> deriv(double t, const std::array<double, 6>& s) const {
    const PlanarLoad l = load(t);
    double fj = 0, fz = 0, tq = l.couple;
    for (int i = 0; i < l.count; ++i) {
      const auto& f = l.forces[static_cast<std::size_t>(i)];
      fj += f.f_j;
      fz += f.f_z;
      tq += (f.height - s[1]) * f.f_j - (f.s - s[0]) * f.f_z;
    }
    return {s[3], s[4], s[5], fj / m, fz / m - g, tq / inertia};
  }

  std::array<double, 6> run(std::array<double, 6> s, double t_end, double h) const {
    const int n = static_cast<int>(std::lround(t_end / h));
    for (int k = 0; k < n; ++k) {
      const double t = k * h;
      auto add = [](const std::array<double, 6>& a, const std::array<double, 6>& b, double c) {
        std::array<double, 6> r{};
        for (int i = 0; i < 6; ++i) r[i] = a[i] + c * b[i];
        return r;
      };
      const auto k1 = deriv(t, s);
      const auto k2 = deriv(t + h / 2, add(s, k1, h / 2));
      const auto k3 = deriv(t + h / 2, add(s, k2, h / 2));
      const auto k4 = deriv(t + h, add(s, k3, h));
      for (int i = 0; i < 6; ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return s;
  }
};

PlanarLoad ramp_load(double t, double m, double g) {
  PlanarLoad l;
  const double uz = m * g * (1.0 + 2.0 * t);
  l.add({0.19, 0.0, 5.0 * t, 0.6 * uz});
  l.add({-0.19, 0.0, 5.0 * t, 0.4 * uz});
  return l;
}

std::vector<PlanarState> rollout_ramp(const PlanarBody& body, double t_end, double dt) {
  std::vector<PlanarLoad> loads;
  const int n = static_cast<int>(std::lround(t_end / dt));
  for (int k = 0; k < n; ++k) loads.push_back(ramp_load(k * dt, body.mass, body.gravity));
  PlanarState s0;
  s0.z = 0.15;
  return planar_rollout(s0, loads, body, dt);
}

}  // namespace

TEST_CASE("presets satisfy their invariants") {
  for (const char* name : {"mini_cheetah", "cyberdog", "humanoid"}) {
    const RobotParams p = preset_params(name);
    CHECK_NOTHROW(p.validate());
    CHECK(p.name == name);
  }
  CHECK_THROWS_AS(preset_params("spot"), std::invalid_argument);
  RobotParams bad = mini_cheetah_params();
  bad.mass = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = mini_cheetah_params();
  bad.joint_min[2] = bad.joint_max[2];
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Mini Cheetah table values") {
  const RobotParams p = mini_cheetah_params();
  CHECK(p.mass == doctest::Approx(11.4));
  CHECK(p.inertia_diag.isApprox(Eigen::Vector3d(0.07, 0.3, 0.34)));
  CHECK(p.leg_lengths[0] + 0.0 == doctest::Approx(0.072));
  CHECK(p.leg_lengths[1] + p.leg_lengths[2] == doctest::Approx(0.411));
  CHECK(p.torque_limits.isApprox(Eigen::Vector3d(24, 24, 36)));
  CHECK(p.velocity_limits[2] == doctest::Approx(193 * 2 * M_PI / 60));
}

TEST_CASE("srb_acceleration: free fall") {
  const RobotParams p = mini_cheetah_params();
  ReducedState s;
  const SrbAcceleration a = srb_acceleration(s, {}, {}, p);
  CHECK(a.linear.isApprox(Eigen::Vector3d(0, 0, -9.81)));
  CHECK(a.angular.norm() == 0.0);
}

TEST_CASE("srb_acceleration: hover at the CoM") {
  const RobotParams p = mini_cheetah_params();
  ReducedState s;
  s.p_com = {0.3, -0.2, 0.4};
  const std::vector<Eigen::Vector3d> f{{0, 0, p.mass * p.gravity}};
  const std::vector<Eigen::Vector3d> r{s.p_com};
  const SrbAcceleration a = srb_acceleration(s, f, r, p);
  CHECK(a.linear.norm() < 1e-12);
  CHECK(a.angular.norm() < 1e-12);
}

TEST_CASE("srb_acceleration: offset force, hand arithmetic") {
  const RobotParams p = mini_cheetah_params();
  ReducedState s;
  const std::vector<Eigen::Vector3d> f{{0, 0, 50}};
  const std::vector<Eigen::Vector3d> r{{0.2, 0, -0.3}};
  const SrbAcceleration a = srb_acceleration(s, f, r, p);
  // r x f = (0*50 - (-0.3)*0, (-0.3)*0 - 0.2*50, 0) = (0, -10, 0)
  CHECK(a.linear.x() == doctest::Approx(0.0));
  CHECK(a.linear.z() == doctest::Approx(50.0 / 11.4 - 9.81).epsilon(1e-12));
  CHECK(a.angular.x() == doctest::Approx(0.0));
  CHECK(a.angular.y() == doctest::Approx(-10.0 / 0.3).epsilon(1e-12));
  CHECK(a.angular.z() == doctest::Approx(0.0));
}

TEST_CASE("srb_acceleration rejects bad input") {
  const RobotParams p = mini_cheetah_params();
  ReducedState s;
  const std::vector<Eigen::Vector3d> f{{0, 0, 1}, {0, 0, 1}};
  const std::vector<Eigen::Vector3d> r{kZero};
  CHECK_THROWS_AS(srb_acceleration(s, f, r, p), std::invalid_argument);
  const std::vector<Eigen::Vector3d> nan{{0, 0, std::nan("")}};
  CHECK_THROWS_AS(srb_acceleration(s, nan, r, p), std::invalid_argument);
}

TEST_CASE("integrate_step") {
  ReducedState s;
  SrbAcceleration g;
  g.linear = {0, 0, -9.81};
  const ReducedState n = integrate_step(s, g, 0.001);
  CHECK(n.v_com.z() == doctest::Approx(-0.00981).epsilon(1e-12));

  ReducedState c;
  c.v_com = {1.5, -2.0, 0.25};
  const ReducedState m = integrate_step(c, SrbAcceleration{}, 0.001);
  CHECK((m.p_com - c.v_com * 0.001).norm() == 0.0);
  CHECK_THROWS_AS(integrate_step(c, SrbAcceleration{}, 0.0), std::invalid_argument);
}

TEST_CASE("integrate_step: 300 hover steps keep the body still") {
  const RobotParams p = mini_cheetah_params();
  ReducedState s;
  s.p_com = {0, 0, 0.25};
  const double w = p.mass * p.gravity / 4;
  const std::vector<Eigen::Vector3d> f(4, Eigen::Vector3d(0, 0, w));
  for (int k = 0; k < 300; ++k) {
    std::vector<Eigen::Vector3d> feet;
    for (double x : {0.19, -0.19})
      for (double y : {0.121, -0.121}) feet.push_back(s.p_com + Eigen::Vector3d(x, y, -0.25));
    s = integrate_step(s, srb_acceleration(s, f, feet, p), 0.001);
  }
  CHECK((s.p_com - Eigen::Vector3d(0, 0, 0.25)).norm() < 1e-9);
}

TEST_CASE("euler angles stay wrapped") {
  ReducedState s;
  s.euler = {0, 0, 3.1};
  s.omega_b = {0, 0, 100.0};
  const ReducedState n = integrate_step(s, SrbAcceleration{}, 0.001);
  CHECK(n.euler.z() > -M_PI);
  CHECK(n.euler.z() <= M_PI);
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  const Eigen::Vector3d rpy(0.3, -0.4, 2.0);
  CHECK(euler_from_rotation(rotation_from_euler(rpy)).isApprox(rpy, 1e-12));
}

TEST_CASE("planar_rollout: hover is a fixed point") {
  const RobotParams p = mini_cheetah_params();
  const PlanarBody body{p.mass, p.inertia_diag.y(), p.gravity};
  PlanarLoad l;
  l.add({0.19, 0.0, 0.0, p.mass * p.gravity / 2});
  l.add({-0.19, 0.0, 0.0, p.mass * p.gravity / 2});
  const std::vector<PlanarLoad> loads(200, l);
  PlanarState s0;
  s0.z = 0.2;
  const auto traj = planar_rollout(s0, loads, body, 1e-3);
  REQUIRE(traj.size() == 201);
  CHECK(std::abs(traj.back().x) < 1e-12);
  CHECK(std::abs(traj.back().z - 0.2) < 1e-12);
  CHECK(std::abs(traj.back().theta) < 1e-12);
}

TEST_CASE("planar_rollout: vertical push through the CoM column keeps pitch zero") {
  const RobotParams p = mini_cheetah_params();
  const PlanarBody body{p.mass, p.inertia_diag.y(), p.gravity};
  std::vector<PlanarLoad> loads;
  for (int k = 0; k < 100; ++k) {
    PlanarLoad l;
    l.add({0.0, 0.0, 0.0, 3 * p.mass * p.gravity});
    loads.push_back(l);
  }
  PlanarState s0;
  s0.z = 0.15;
  const auto traj = planar_rollout(s0, loads, body, 1e-3);
  CHECK(traj.back().z > 0.15);
  CHECK(traj.back().theta == 0.0);
}

TEST_CASE("planar_rollout: agreement with a fine RK4 reference") {
  const RobotParams p = mini_cheetah_params();
  const PlanarBody body{p.mass, p.inertia_diag.y(), p.gravity};
  const double T = 0.2;
  Rk4Body ref{p.mass, p.inertia_diag.y(), p.gravity, [&](double t) { return ramp_load(t, p.mass, p.gravity); }};
  const auto r = ref.run({0, 0.15, 0, 0, 0, 0}, T, 1e-5);

  auto err = [&](double dt) {
    const PlanarState e = rollout_ramp(body, T, dt).back();
    return std::hypot(e.x - r[0], e.z - r[1]);
  };
  CHECK(err(1e-4) < 1e-4);

  // First order: halving dt roughly halves the terminal error.
  const double e1 = err(2e-3), e2 = err(1e-3);
  CHECK(e2 < e1);
  CHECK(e1 / e2 > 2.0 / 3.0 * 1.0);
  CHECK(e1 / e2 < 2.0 * 3.0);
}

TEST_CASE("planar_rollout: momentum and energy") {
  const RobotParams p = mini_cheetah_params();
  const PlanarBody body{p.mass, p.inertia_diag.y(), p.gravity};
  const double dt = 1e-3;
  const auto traj = rollout_ramp(body, 0.2, dt);
  double impulse_j = 0, impulse_z = 0;
  for (int k = 0; k < 200; ++k) {
    const PlanarLoad l = ramp_load(k * dt, p.mass, p.gravity);
    impulse_j += (l.forces[0].f_j + l.forces[1].f_j) * dt;
    impulse_z += (l.forces[0].f_z + l.forces[1].f_z - p.mass * p.gravity) * dt;
  }
  CHECK(p.mass * traj.back().vx == doctest::Approx(impulse_j).epsilon(1e-9));
  CHECK(p.mass * traj.back().vz == doctest::Approx(impulse_z).epsilon(1e-9));

  // Free flight: energy drifts by O(dt) per step only.
  PlanarState s0;
  s0.z = 1.0;
  s0.vx = 1.0;
  s0.vz = 2.0;
  const std::vector<PlanarLoad> none(300);
  const auto fl = planar_rollout(s0, none, body, dt);
  auto energy = [&](const PlanarState& s) {
    return 0.5 * p.mass * (s.vx * s.vx + s.vz * s.vz) + p.mass * p.gravity * s.z;
  };
  for (std::size_t k = 1; k < fl.size(); ++k)
    CHECK(std::abs(energy(fl[k]) - energy(fl[k - 1])) < p.mass * p.gravity * p.gravity * dt * dt * 2);
}

TEST_CASE("planar_rollout rejects empty or bad input") {
  const PlanarBody body{11.4, 0.3, 9.81};
  CHECK_THROWS_AS(planar_rollout(PlanarState{}, {}, body, 1e-3), std::invalid_argument);
  const std::vector<PlanarLoad> one(1);
  CHECK_THROWS_AS(planar_rollout(PlanarState{}, one, body, 0.0), std::invalid_argument);
}
