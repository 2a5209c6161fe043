#include "crane/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace crane {
namespace {

enum class KeyType { kDouble, kInt, kBool, kString };

struct KeySpec {
  KeyType type;
  const char* default_value;
};

// Single source of truth for every configuration key.
const std::map<std::string, KeySpec>& registry() {
  static const std::map<std::string, KeySpec> keys = {
      {"seed", {KeyType::kInt, "7"}},

      // manipulator chain
      {"plant.h0", {KeyType::kDouble, "0.5"}},
      {"plant.l2", {KeyType::kDouble, "0.8"}},
      {"plant.l3", {KeyType::kDouble, "0.6"}},
      {"plant.d4max", {KeyType::kDouble, "0.4"}},
      {"plant.j1_lo", {KeyType::kDouble, "-2.0"}},
      {"plant.j1_hi", {KeyType::kDouble, "2.0"}},
      {"plant.j2_lo", {KeyType::kDouble, "0.0"}},
      {"plant.j2_hi", {KeyType::kDouble, "1.2"}},
      {"plant.j3_lo", {KeyType::kDouble, "-2.2"}},
      {"plant.j3_hi", {KeyType::kDouble, "-0.3"}},
      {"plant.d4_lo", {KeyType::kDouble, "0.0"}},

      // cylinder linkages for joints 2 and 3
      {"cyl2.a", {KeyType::kDouble, "0.30"}},
      {"cyl2.b", {KeyType::kDouble, "0.35"}},
      {"cyl2.offset", {KeyType::kDouble, "-1.0"}},
      {"cyl2.sign", {KeyType::kDouble, "1.0"}},
      {"cyl2.l_min", {KeyType::kDouble, "0.28"}},
      {"cyl2.l_max", {KeyType::kDouble, "0.60"}},
      {"cyl3.a", {KeyType::kDouble, "0.25"}},
      {"cyl3.b", {KeyType::kDouble, "0.30"}},
      {"cyl3.offset", {KeyType::kDouble, "0.2"}},
      {"cyl3.sign", {KeyType::kDouble, "-1.0"}},
      {"cyl3.l_min", {KeyType::kDouble, "0.10"}},
      {"cyl3.l_max", {KeyType::kDouble, "0.53"}},

      // synthetic sensor noise
      {"noise.sigma_cyl", {KeyType::kDouble, "2e-7"}},
      {"noise.sigma_angle", {KeyType::kDouble, "0.004"}},
      {"noise.sigma_pos", {KeyType::kDouble, "0.002"}},

      // data generation
      {"data.actuator_sweeps", {KeyType::kInt, "20"}},
      {"data.fk_samples", {KeyType::kInt, "500"}},

      // supervised training
      {"train.epochs", {KeyType::kInt, "500"}},
      {"train.batch_size", {KeyType::kInt, "64"}},
      {"train.actuator_lr", {KeyType::kDouble, "1e-4"}},
      {"train.forward_lr", {KeyType::kDouble, "1e-3"}},

      // validation gates used by the CLI
      {"bounds.actuator_rmse", {KeyType::kDouble, "0.002"}},
      {"bounds.forward_max_abs_err", {KeyType::kDouble, "0.03"}},

      // reward shaping
      {"reward.r_step", {KeyType::kDouble, "0.001"}},
      {"reward.dist_bonus", {KeyType::kDouble, "0.002"}},
      {"reward.jlim_penalty", {KeyType::kDouble, "0.0005"}},

      // environment stepping
      {"env.limit_margin_fraction", {KeyType::kDouble, "0.05"}},
      {"env.max_step_delta_revolute", {KeyType::kDouble, "0.05"}},
      {"env.max_step_delta_prismatic", {KeyType::kDouble, "0.02"}},
      {"env.rate_clamp", {KeyType::kBool, "true"}},

      // DDPG agent
      {"ddpg.episodes", {KeyType::kInt, "200"}},
      {"ddpg.steps", {KeyType::kInt, "200"}},
      {"ddpg.buffer_size", {KeyType::kInt, "100000"}},
      {"ddpg.batch_size", {KeyType::kInt, "256"}},
      {"ddpg.gamma", {KeyType::kDouble, "0.99"}},
      {"ddpg.tau", {KeyType::kDouble, "1e-3"}},
      {"ddpg.actor_lr", {KeyType::kDouble, "1e-3"}},
      {"ddpg.critic_lr", {KeyType::kDouble, "1e-3"}},
      {"ddpg.ou_sigma", {KeyType::kDouble, "0.1"}},
      {"ddpg.ou_theta", {KeyType::kDouble, "0.15"}},
      {"ddpg.n_candidates", {KeyType::kInt, "16"}},
      {"ddpg.hidden_units", {KeyType::kInt, "128"}},
      {"ddpg.checkpoint_every", {KeyType::kInt, "50"}},

      // tracking evaluation
      {"eval.kind", {KeyType::kString, "helix"}},
      {"eval.center_x", {KeyType::kDouble, "0.9"}},
      {"eval.center_y", {KeyType::kDouble, "0.0"}},
      {"eval.center_z", {KeyType::kDouble, "0.8"}},
      {"eval.radius", {KeyType::kDouble, "0.25"}},
      {"eval.pitch", {KeyType::kDouble, "0.15"}},
      {"eval.turns", {KeyType::kDouble, "2.0"}},
      {"eval.n_points", {KeyType::kInt, "200"}},
      {"eval.steps_per_waypoint", {KeyType::kInt, "10"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

void check_value(const std::string& key, const KeySpec& spec,
                 const std::string& value) {
  errno = 0;
  char* end = nullptr;
  switch (spec.type) {
    case KeyType::kDouble: {
      std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': expected number, got '" +
                          value + "'");
      break;
    }
    case KeyType::kInt: {
      std::strtoll(value.c_str(), &end, 10);
      if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': expected integer, got '" +
                          value + "'");
      break;
    }
    case KeyType::kBool: {
      if (value != "true" && value != "false" && value != "on" &&
          value != "off" && value != "1" && value != "0")
        throw ConfigError("config key '" + key + "': expected boolean, got '" +
                          value + "'");
      break;
    }
    case KeyType::kString:
      break;
  }
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& [key, spec] : registry()) c.values_[key] = spec.default_value;
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Config c = defaults();
  c.parse(buf.str(), path.string());
  return c;
}

void Config::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = registry().find(key);
  if (it == registry().end())
    throw ConfigError("unknown config key '" + key + "'");
  check_value(key, it->second, value);
  values_[key] = value;
}

double Config::get_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return std::strtod(it->second.c_str(), nullptr);
}

std::int64_t Config::get_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return std::strtoll(it->second.c_str(), nullptr, 10);
}

bool Config::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  const std::string& v = it->second;
  return v == "true" || v == "on" || v == "1";
}

const std::string& Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace crane
