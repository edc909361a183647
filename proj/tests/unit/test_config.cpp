#include <doctest.h>

#include <omnijump/config.hpp>

using namespace omnijump;

TEST_CASE("key-value parsing") {
  const auto c = KeyValueConfig::parse("# robot\nmass = 12.5\n\ninertia_diag = 0.1 0.2 0.3  # trailing\nname = dog\n");
  CHECK(c.number("mass") == 12.5);
  CHECK(c.numbers("inertia_diag").size() == 3);
  CHECK(c.text("name") == "dog");
  CHECK(c.lines.at("inertia_diag") == 4);
  CHECK_FALSE(c.has("gravity"));
}

TEST_CASE("parse errors carry the line") {
  try {
    (void)KeyValueConfig::parse("mass = 1\nbroken line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  const auto c = KeyValueConfig::parse("mass = heavy\n");
  CHECK_THROWS_AS((void)c.number("mass"), ConfigError);
  CHECK_THROWS_AS((void)c.number("absent"), ConfigError);
}

TEST_CASE("robot config round trip is exact") {
  for (const char* name : {"mini_cheetah", "cyberdog", "humanoid"}) {
    const RobotParams p = preset_params(name);
    const RobotParams q = robot_from_config(KeyValueConfig::parse(robot_to_config(p)));
    CHECK(q.name == p.name);
    CHECK(q.mass == p.mass);
    CHECK(q.inertia_diag == p.inertia_diag);
    CHECK(q.leg_lengths == p.leg_lengths);
    CHECK(q.hip_offsets == p.hip_offsets);
    CHECK(q.joint_min == p.joint_min);
    CHECK(q.joint_max == p.joint_max);
    CHECK(q.torque_limits == p.torque_limits);
    CHECK(q.velocity_limits == p.velocity_limits);
    CHECK(q.stand_height == p.stand_height);
    CHECK(robot_to_config(q) == robot_to_config(p));
  }
}

TEST_CASE("robot config overrides a base preset") {
  const RobotParams p = robot_from_config(KeyValueConfig::parse("base = cyberdog\nmass = 15\n"));
  CHECK(p.mass == 15.0);
  CHECK(p.leg_lengths == cyberdog_params().leg_lengths);
  CHECK_THROWS_AS(robot_from_config(KeyValueConfig::parse("mass = -1\n")), ConfigError);
  CHECK_THROWS_AS(robot_from_config(KeyValueConfig::parse("inertia_diag = 1 2\n")), ConfigError);
}
