#include "omnijump/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace omnijump {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, const std::string& key, int line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("key '" + key + "': not a number: '" + tok + "'", line);
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", line_no);
    std::istringstream vs(line.substr(eq + 1));
    std::vector<std::string> toks;
    for (std::string t; vs >> t;) toks.push_back(t);
    if (toks.empty()) throw ConfigError("key '" + key + "' has no value", line_no);
    cfg.values[key] = std::move(toks);
    cfg.lines[key] = line_no;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path, 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing key '" + key + "'", 0);
  const int line = lines.at(key);
  std::vector<double> out;
  out.reserve(it->second.size());
  for (const auto& tok : it->second) out.push_back(parse_double(tok, key, line));
  return out;
}

double KeyValueConfig::number(const std::string& key) const {
  auto v = numbers(key);
  if (v.size() != 1) throw ConfigError("key '" + key + "' expects one number", lines.at(key));
  return v[0];
}

std::string KeyValueConfig::text(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing key '" + key + "'", 0);
  if (it->second.size() != 1)
    throw ConfigError("key '" + key + "' expects one word", lines.at(key));
  return it->second[0];
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, vs] : values) {
    out += k + " =";
    for (const auto& v : vs) out += " " + v;
    out += "\n";
  }
  return out;
}

RobotParams robot_from_config(const KeyValueConfig& cfg) {
  RobotParams p = preset_params(cfg.has("base") ? cfg.text("base") : "mini_cheetah");

  auto fixed = [&](const std::string& key, std::size_t n) {
    auto v = cfg.numbers(key);
    if (v.size() != n)
      throw ConfigError("key '" + key + "' expects " + std::to_string(n) + " numbers",
                        cfg.lines.at(key));
    return v;
  };
  auto vec3 = [&](const std::string& key) {
    auto v = fixed(key, 3);
    return Eigen::Vector3d(v[0], v[1], v[2]);
  };

  if (cfg.has("name")) p.name = cfg.text("name");
  if (cfg.has("platform")) {
    const std::string kind = cfg.text("platform");
    if (kind == "quadruped") p.platform = Platform::Quadruped;
    else if (kind == "humanoid") p.platform = Platform::Humanoid;
    else throw ConfigError("platform must be quadruped or humanoid", cfg.lines.at("platform"));
  }
  if (cfg.has("mass")) p.mass = cfg.number("mass");
  if (cfg.has("inertia_diag")) p.inertia_diag = vec3("inertia_diag");
  if (cfg.has("leg_lengths")) p.leg_lengths = cfg.numbers("leg_lengths");
  if (cfg.has("hip_offsets")) {
    auto v = cfg.numbers("hip_offsets");
    if (v.empty() || v.size() % 3 != 0)
      throw ConfigError("hip_offsets expects x y z per leg", cfg.lines.at("hip_offsets"));
    p.hip_offsets.clear();
    for (std::size_t i = 0; i < v.size(); i += 3) p.hip_offsets.emplace_back(v[i], v[i + 1], v[i + 2]);
  }
  if (cfg.has("joint_limits")) {
    auto v = fixed("joint_limits", 6);
    for (int j = 0; j < 3; ++j) {
      p.joint_min[j] = v[2 * j];
      p.joint_max[j] = v[2 * j + 1];
    }
  }
  if (cfg.has("torque_limits")) p.torque_limits = vec3("torque_limits");
  if (cfg.has("velocity_limits")) p.velocity_limits = vec3("velocity_limits");
  if (cfg.has("friction_coeff")) p.friction_coeff = cfg.number("friction_coeff");
  if (cfg.has("gravity")) p.gravity = cfg.number("gravity");
  if (cfg.has("stand_height")) p.stand_height = cfg.number("stand_height");
  if (cfg.has("min_contact_force")) p.min_contact_force = cfg.number("min_contact_force");
  if (cfg.has("min_joint_height")) p.min_joint_height = cfg.number("min_joint_height");

  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  return p;
}

std::string robot_to_config(const RobotParams& p) {
  std::string out;
  auto line = [&](const std::string& key, std::initializer_list<double> vs) {
    out += key + " =";
    for (double v : vs) out += " " + fmt(v);
    out += "\n";
  };
  out += "name = " + p.name + "\n";
  out += std::string("platform = ") +
         (p.platform == Platform::Quadruped ? "quadruped" : "humanoid") + "\n";
  line("mass", {p.mass});
  line("inertia_diag", {p.inertia_diag.x(), p.inertia_diag.y(), p.inertia_diag.z()});
  out += "leg_lengths =";
  for (double l : p.leg_lengths) out += " " + fmt(l);
  out += "\nhip_offsets =";
  for (const auto& h : p.hip_offsets) out += " " + fmt(h.x()) + " " + fmt(h.y()) + " " + fmt(h.z());
  out += "\n";
  line("joint_limits", {p.joint_min[0], p.joint_max[0], p.joint_min[1], p.joint_max[1],
                        p.joint_min[2], p.joint_max[2]});
  line("torque_limits", {p.torque_limits[0], p.torque_limits[1], p.torque_limits[2]});
  line("velocity_limits", {p.velocity_limits[0], p.velocity_limits[1], p.velocity_limits[2]});
  line("friction_coeff", {p.friction_coeff});
  line("gravity", {p.gravity});
  line("stand_height", {p.stand_height});
  line("min_contact_force", {p.min_contact_force});
  line("min_joint_height", {p.min_joint_height});
  return out;
}

}  // namespace omnijump
