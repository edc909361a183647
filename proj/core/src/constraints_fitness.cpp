#include "omnijump/constraints_fitness.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace omnijump {

namespace {

constexpr std::array<ConstraintKind, kConstraintCount> kKinds{
    ConstraintKind::ContactForce,  ConstraintKind::FrictionCone,  ConstraintKind::Zmp,
    ConstraintKind::JointAngle,    ConstraintKind::JointVelocity, ConstraintKind::JointPosition,
    ConstraintKind::JointTorque};

std::size_t slot(ConstraintKind k) { return static_cast<std::size_t>(k); }

}  // namespace

int priority(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::ContactForce: return 15;
    case ConstraintKind::FrictionCone: return 13;
    case ConstraintKind::Zmp: return 12;
    case ConstraintKind::JointAngle: return 11;
    case ConstraintKind::JointVelocity: return 9;
    case ConstraintKind::JointPosition: return 8;
    case ConstraintKind::JointTorque: return 6;
  }
  return 0;
}

const char* constraint_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::ContactForce: return "contact_force";
    case ConstraintKind::FrictionCone: return "friction_cone";
    case ConstraintKind::Zmp: return "zmp";
    case ConstraintKind::JointAngle: return "joint_angle";
    case ConstraintKind::JointVelocity: return "joint_velocity";
    case ConstraintKind::JointPosition: return "joint_position";
    case ConstraintKind::JointTorque: return "joint_torque";
  }
  return "?";
}

ConstraintReport::ConstraintReport() {
  for (ConstraintKind k : kKinds) {
    entries[slot(k)].kind = k;
    entries[slot(k)].priority = priority(k);
  }
}

const ConstraintEntry& ConstraintReport::at(ConstraintKind k) const { return entries[slot(k)]; }
ConstraintEntry& ConstraintReport::at(ConstraintKind k) { return entries[slot(k)]; }

void ConstraintReport::set(ConstraintKind k, double sigma) {
  auto& e = at(k);
  e.sigma = sigma > 0.0 ? sigma : 0.0;
  e.active = e.sigma > 0.0;
}

bool ConstraintReport::feasible() const {
  if (structural) return false;
  for (const auto& e : entries)
    if (e.active) return false;
  return true;
}

ConstraintReport evaluate_constraints(std::span<const TrajectorySample> samples,
                                      const RobotParams& params, const ZmpBounds& zmp) {
  bool any_stance = false;
  for (const auto& s : samples)
    for (const auto& l : s.legs) any_stance = any_stance || l.on_ground;
  if (!any_stance) throw std::invalid_argument("evaluate_constraints: no stance samples");

  ConstraintReport rep;
  auto worse = [&](ConstraintKind k, double deficit, double t) {
    if (!(deficit > 0.0)) return;
    auto& e = rep.at(k);
    if (!e.active) e.first_time = t;
    if (deficit > e.sigma) e.sigma = deficit;
    e.active = true;
  };

  const double fz_min = params.min_contact_force;
  const double mu = params.friction_coeff;
  for (const auto& s : samples) {
    for (const auto& leg : s.legs) {
      if (leg.loaded) {
        const double fz = leg.force.z();
        worse(ConstraintKind::ContactForce, fz_min - fz, s.t);
        if (fz > fz_min) {
          const double ratio = leg.force.head<2>().norm() / fz;
          worse(ConstraintKind::FrictionCone, ratio - mu, s.t);
        }
      }
      if (!leg.on_ground) continue;
      if (!leg.reachable) {
        worse(ConstraintKind::JointAngle, std::numbers::pi + leg.reach_deficit, s.t);
        continue;
      }
      worse(ConstraintKind::JointAngle, leg.joint_angle_violation, s.t);
      worse(ConstraintKind::JointPosition, params.min_joint_height - leg.min_joint_height, s.t);
      for (int j = 0; j < 3; ++j) {
        worse(ConstraintKind::JointVelocity, std::abs(leg.qd[j]) - params.velocity_limits[j], s.t);
        if (leg.loaded)
          worse(ConstraintKind::JointTorque, std::abs(leg.tau[j]) - params.torque_limits[j], s.t);
      }
    }
    if (zmp.enabled && s.zmp_valid) {
      worse(ConstraintKind::Zmp, zmp.lower - s.zmp, s.t);
      worse(ConstraintKind::Zmp, s.zmp - zmp.upper, s.t);
      // The open interval excludes its ends.
      if (s.zmp == zmp.lower || s.zmp == zmp.upper) worse(ConstraintKind::Zmp, 1e-12, s.t);
    }
  }
  rep.energy = energy(samples);
  return rep;
}

double energy(std::span<const double> t, std::span<const double> power) {
  if (t.size() != power.size()) throw std::invalid_argument("energy: size mismatch");
  double e = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) e += 0.5 * (power[k] + power[k - 1]) * (t[k] - t[k - 1]);
  return e;
}

double mechanical_power(const TrajectorySample& s) {
  double p = 0.0;
  for (const auto& leg : s.legs)
    if (leg.on_ground && leg.reachable) p += leg.tau.cwiseProduct(leg.qd).cwiseAbs().sum();
  return p;
}

double energy(std::span<const TrajectorySample> samples) {
  std::vector<double> t;
  std::vector<double> p;
  t.reserve(samples.size());
  p.reserve(samples.size());
  for (const auto& s : samples) {
    t.push_back(s.t);
    p.push_back(mechanical_power(s));
  }
  return energy(t, p);
}

double fitness(const ConstraintReport& r) {
  if (r.structural) return kStructuralPenalty * (1.0 + r.structural_magnitude);
  double f = 0.0;
  for (const auto& e : r.entries) {
    if (!e.active) continue;
    f += std::pow(10.0, e.priority + 3) + std::pow(10.0, e.priority) * e.sigma;
  }
  return f + r.energy;
}

std::string report_to_text(const ConstraintReport& r) {
  std::string out;
  char buf[160];
  if (r.structural) {
    out += "structural_failure " + r.structural_reason + "\n";
    std::snprintf(buf, sizeof buf, "structural_magnitude %.9g\n", r.structural_magnitude);
    out += buf;
  }
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%-15s n=%-2d W=%d sigma=%.9g first_t=%.9g\n",
                  constraint_name(e.kind), e.priority, e.active ? 1 : 0, e.sigma,
                  e.active ? e.first_time : -1.0);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "energy %.9g\nfitness %.9g\nfeasible %s\n", r.energy, fitness(r),
                r.feasible() ? "yes" : "no");
  out += buf;
  return out;
}

}  // namespace omnijump
