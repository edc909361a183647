#include "common.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace jumpopt {

omnijump::RobotParams resolve_robot(const std::string& spec, omnijump::JumpMode mode) {
  std::string s = spec;
  if (s.empty()) {
    if (const char* env = std::getenv(kRobotEnv); env != nullptr && *env != '\0') s = env;
  }
  if (s.empty()) {
    return mode == omnijump::JumpMode::Humanoid ? omnijump::humanoid_params()
                                                : omnijump::mini_cheetah_params();
  }
  if (s == "mini_cheetah" || s == "cyberdog" || s == "humanoid") return omnijump::preset_params(s);
  if (!fs::exists(s)) throw CommandError(kExitNoInput, "robot config not found: " + s);
  try {
    return omnijump::robot_from_config(omnijump::KeyValueConfig::load(s));
  } catch (const std::exception& e) {
    throw CommandError(kExitDataError, s + ": " + e.what());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(kExitNoInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_artifact(const fs::path& out, const std::string& name, const std::string& text) {
  if (name.empty() || fs::path(name).has_parent_path())
    throw CommandError(kExitSoftware, "artifact name must be a plain file name: " + name);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw CommandError(kExitCantCreate, "cannot create " + out.string() + ": " + ec.message());
  const fs::path path = out / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CommandError(kExitCantCreate, "cannot write " + path.string());
  f << text;
  if (!f) throw CommandError(kExitCantCreate, "write failed: " + path.string());
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) { set(key, number(value)); }

void Manifest::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

std::string Manifest::text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string option_digest_text(const CLI::App& app) {
  std::string out = app.get_name() + "\n";
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_name();
    // Output location and thread count do not change results.
    if (name == "--out" || name == "--workers" || name == "--help" || name == "-h") continue;
    if (opt->count() == 0) continue;
    out += name;
    for (const auto& r : opt->results()) out += " " + r;
    out += "\n";
  }
  return out;
}

}  // namespace jumpopt
