// Command-line pipeline driver: synthetic data generation, supervised
// surrogate training, DDPG policy training, and tracking evaluation.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "crane/config.hpp"
#include "crane/datasets.hpp"
#include "crane/ddpg.hpp"
#include "crane/env.hpp"
#include "crane/eval.hpp"
#include "crane/nn.hpp"
#include "crane/plant.hpp"
#include "crane/surrogate.hpp"

namespace fs = std::filesystem;
using namespace crane;

namespace {

// Exit codes: 0 success, 1 usage, then one code per failure class.
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitBounds = 4;

Config resolve_config(const std::string& config_path) {
  if (!config_path.empty()) return Config::load(config_path);
  if (const char* env = std::getenv("CRANE_RL_CONFIG"); env && *env)
    return Config::load(env);
  return Config::defaults();
}

std::uint64_t resolve_seed(const Config& cfg,
                           const std::optional<std::uint64_t>& flag_seed) {
  return flag_seed ? *flag_seed : std::uint64_t(cfg.get_int("seed"));
}

void write_manifest(const fs::path& path, const std::string& command,
                    const Config& cfg, std::uint64_t root_seed,
                    const std::vector<std::pair<std::string, std::uint64_t>>&
                        derived_seeds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << "command = " << command << '\n';
  out << "root_seed = " << root_seed << '\n';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  out << "config_hash = " << buf << '\n';
  for (const auto& [name, seed] : derived_seeds)
    out << "seed." << name << " = " << seed << '\n';
  if (!out) throw IoError("manifest write failed: " + path.string());
}

int cmd_gen_data(const Config& cfg, const fs::path& out_dir,
                 std::uint64_t seed) {
  ChainParams chain = chain_params_from_config(cfg);
  CylinderGeometry geom2 = cylinder_from_config(cfg, 2);
  CylinderGeometry geom3 = cylinder_from_config(cfg, 3);
  NoiseModel noise = noise_from_config(cfg);
  const int sweeps = int(cfg.get_int("data.actuator_sweeps"));
  const int fk_n = int(cfg.get_int("data.fk_samples"));

  fs::create_directories(out_dir);

  const std::uint64_t seed_a2 = derive_seed(seed, "data.actuator2");
  const std::uint64_t seed_a3 = derive_seed(seed, "data.actuator3");
  const std::uint64_t seed_fk = derive_seed(seed, "data.fk");

  Rng rng_a2(seed_a2), rng_a3(seed_a3), rng_fk(seed_fk);
  auto log2 = generate_actuator_log(geom2, sweeps, noise, rng_a2);
  auto log3 = generate_actuator_log(geom3, sweeps, noise, rng_a3);
  auto fk = generate_fk_dataset(chain, fk_n, noise, rng_fk);

  write_actuator_csv(out_dir / "actuator_j2.csv", log2);
  write_actuator_csv(out_dir / "actuator_j3.csv", log3);
  write_fk_csv(out_dir / "fk_dataset.csv", fk);
  write_manifest(out_dir / "manifest.txt", "gen-data", cfg, seed,
                 {{"data.actuator2", seed_a2},
                  {"data.actuator3", seed_a3},
                  {"data.fk", seed_fk}});

  std::cout << "wrote " << log2.size() << " + " << log3.size()
            << " actuator samples and " << fk.size() << " fk samples to "
            << out_dir.string() << '\n';
  return 0;
}

int cmd_train_actuator(const Config& cfg, const fs::path& log_path, int joint,
                       const fs::path& out_path, std::string report_path,
                       std::uint64_t seed) {
  auto log = read_actuator_csv(log_path);
  surrogate::TrainOptions opt = surrogate::actuator_train_options_from_config(cfg);
  opt.seed = derive_seed(seed, joint == 2 ? "train.actuator2" : "train.actuator3");

  surrogate::TrainedNet trained = joint == 2
                                      ? surrogate::train_actuator_net2(log, opt)
                                      : surrogate::train_actuator_net3(log, opt);
  nn::save_model(trained.model, out_path);
  if (report_path.empty()) report_path = out_path.string() + ".report.csv";
  surrogate::write_report_csv(report_path, trained.heldout);

  const double rmse = trained.heldout.rmse[0];
  const double bound = cfg.get_double("bounds.actuator_rmse");
  std::cout << "actuator net joint " << joint
            << ": held-out rmse = " << io::format_double(rmse) << " m (bound "
            << io::format_double(bound) << ")\n";
  if (rmse > bound) {
    std::cerr << "validation bound exceeded\n";
    return kExitBounds;
  }
  return 0;
}

int cmd_train_forward(const Config& cfg, const fs::path& data_path,
                      const fs::path& out_path, std::string report_path,
                      std::uint64_t seed) {
  auto data = read_fk_csv(data_path);
  surrogate::TrainOptions opt = surrogate::forward_train_options_from_config(cfg);
  opt.seed = derive_seed(seed, "train.forward");

  surrogate::TrainedNet trained = surrogate::train_forward_net(data, opt);
  nn::save_model(trained.model, out_path);
  if (report_path.empty()) report_path = out_path.string() + ".report.csv";
  surrogate::write_report_csv(report_path, trained.heldout);

  const double bound = cfg.get_double("bounds.forward_max_abs_err");
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    std::cout << "forward net axis " << "xyz"[k] << ": held-out max abs err = "
              << io::format_double(trained.heldout.max_abs_err[k]) << " m (bound "
              << io::format_double(bound) << ")\n";
    ok = ok && trained.heldout.max_abs_err[k] <= bound;
  }
  if (!ok) {
    std::cerr << "validation bound exceeded\n";
    return kExitBounds;
  }
  return 0;
}

int cmd_train_policy(const Config& cfg, const fs::path& fk_model_path,
                     bool feedback, const fs::path& out_dir,
                     std::uint64_t seed) {
  nn::MlpModel fk_net = nn::load_model(fk_model_path);
  EnvParams env_params = env_params_from_config(cfg);
  ReachEnv env(env_params);

  ddpg::DdpgConfig dcfg = ddpg::ddpg_config_from_config(cfg);
  dcfg.feedback = feedback;
  dcfg.seed = seed;
  ddpg::DdpgAgent agent = ddpg::make_agent(dcfg);

  fs::create_directories(out_dir);
  ddpg::CheckpointFn checkpoint = [&](int episode, const nn::MlpModel& actor) {
    char name[64];
    std::snprintf(name, sizeof(name), "actor_ep%04d.mlp", episode);
    nn::save_model(actor, out_dir / name);
  };

  ddpg::TrainResult result = ddpg::train(env, agent, fk_net, dcfg, checkpoint);

  nn::save_model(agent.actor, out_dir / "actor_final.mlp");
  {
    std::ofstream out(out_dir / "rewards.csv", std::ios::binary);
    if (!out) throw IoError("cannot write rewards.csv");
    out << "episode,reward\n";
    for (std::size_t i = 0; i < result.episode_rewards.size(); ++i)
      out << i << ',' << io::format_double(result.episode_rewards[i]) << '\n';
  }
  write_manifest(out_dir / "manifest.txt", "train-policy", cfg, seed,
                 {{"env", derive_seed(seed, "env")},
                  {"noise", derive_seed(seed, "noise")},
                  {"buffer", derive_seed(seed, "buffer")},
                  {"actor_init", derive_seed(seed, "actor_init")},
                  {"critic_init", derive_seed(seed, "critic_init")}});

  const std::size_t n = result.episode_rewards.size();
  double tail_mean = 0.0;
  const std::size_t tail = std::min<std::size_t>(40, n);
  for (std::size_t i = n - tail; i < n; ++i)
    tail_mean += result.episode_rewards[i];
  if (tail > 0) tail_mean /= double(tail);
  std::cout << "trained " << n << " episodes (feedback "
            << (feedback ? "on" : "off")
            << "); mean reward over last " << tail
            << " episodes = " << io::format_double(tail_mean) << '\n';
  return 0;
}

int cmd_eval_track(const Config& cfg, const fs::path& actor_path,
                   const fs::path& actuator2_path, const fs::path& actuator3_path,
                   const fs::path& out_dir, std::uint64_t seed) {
  nn::MlpModel actor = nn::load_model(actor_path);
  nn::MlpModel net2 = nn::load_model(actuator2_path);
  nn::MlpModel net3 = nn::load_model(actuator3_path);

  EnvParams env_params = env_params_from_config(cfg);
  ReachEnv env(env_params);
  ddpg::ActionCodec codec(env_params.chain.limits);
  CylinderGeometry geom2 = cylinder_from_config(cfg, 2);
  CylinderGeometry geom3 = cylinder_from_config(cfg, 3);

  eval::TrajectorySpec spec = eval::trajectory_from_config(cfg);
  std::vector<EePosition> waypoints =
      eval::make_trajectory(spec, env_params.chain);

  Rng rng(derive_seed(seed, "eval"));
  eval::TrackingReport report =
      eval::track(actor, env, waypoints, codec,
                  int(cfg.get_int("eval.steps_per_waypoint")), rng);

  fs::create_directories(out_dir);
  eval::write_tracking_csv(out_dir / "tracking.csv", report);
  eval::write_tracking_summary(out_dir / "tracking_summary.txt", report);
  auto valves =
      eval::export_valve_commands(report.joints, net2, geom2, net3, geom3);
  eval::write_valve_csv(out_dir / "valve_commands.csv", valves);
  write_manifest(out_dir / "manifest.txt", "eval-track", cfg, seed,
                 {{"eval", derive_seed(seed, "eval")}});

  std::cout << "tracked " << waypoints.size() << " waypoints; rmse (m) = ["
            << io::format_double(report.metrics.rmse[0]) << ", "
            << io::format_double(report.metrics.rmse[1]) << ", "
            << io::format_double(report.metrics.rmse[2]) << "]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven crane control pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path,
                 "Flat key = value config file (falls back to the "
                 "CRANE_RL_CONFIG environment variable, then to defaults)");
  app.add_option("--seed", seed_flag, "Root seed (overrides the config)");

  auto* gen = app.add_subcommand("gen-data",
                                 "Generate actuator logs and the fk dataset");
  std::string gen_out;
  gen->add_option("--out-dir", gen_out, "Output directory")->required();

  auto* ta = app.add_subcommand("train-actuator",
                                "Train a cylinder-length regressor from a log");
  std::string ta_log, ta_out, ta_report;
  int ta_joint = 0;
  ta->add_option("--log", ta_log, "Actuator log CSV")->required();
  ta->add_option("--joint", ta_joint, "Joint index (2 or 3)")
      ->required()
      ->check(CLI::IsMember({2, 3}));
  ta->add_option("--out", ta_out, "Output model file")->required();
  ta->add_option("--report", ta_report, "Validation report CSV path");

  auto* tf = app.add_subcommand("train-forward",
                                "Train the joint-to-position network");
  std::string tf_data, tf_out, tf_report;
  tf->add_option("--data", tf_data, "FK dataset CSV")->required();
  tf->add_option("--out", tf_out, "Output model file")->required();
  tf->add_option("--report", tf_report, "Validation report CSV path");

  auto* tp = app.add_subcommand("train-policy", "Train the DDPG controller");
  std::string tp_fk, tp_out, tp_feedback = "on";
  tp->add_option("--fk-model", tp_fk, "Trained forward network")->required();
  tp->add_option("--feedback", tp_feedback, "Candidate action feedback")
      ->check(CLI::IsMember({"on", "off"}));
  tp->add_option("--out-dir", tp_out, "Output directory")->required();

  auto* et = app.add_subcommand("eval-track",
                                "Track a trajectory with a frozen policy");
  std::string et_actor, et_traj_cfg, et_a2, et_a3, et_out;
  et->add_option("--actor", et_actor, "Trained actor model")->required();
  et->add_option("--trajectory-config", et_traj_cfg,
                 "Config file with the eval.* trajectory keys");
  et->add_option("--actuator2", et_a2, "Actuator network for joint 2")
      ->required();
  et->add_option("--actuator3", et_a3, "Actuator network for joint 3")
      ->required();
  et->add_option("--out-dir", et_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    // eval-track reads the trajectory (and plant) from --trajectory-config
    if (et->parsed() && !et_traj_cfg.empty()) config_path = et_traj_cfg;
    Config cfg = resolve_config(config_path);
    const std::uint64_t seed = resolve_seed(cfg, seed_flag);

    if (gen->parsed()) return cmd_gen_data(cfg, gen_out, seed);
    if (ta->parsed())
      return cmd_train_actuator(cfg, ta_log, ta_joint, ta_out, ta_report, seed);
    if (tf->parsed())
      return cmd_train_forward(cfg, tf_data, tf_out, tf_report, seed);
    if (tp->parsed())
      return cmd_train_policy(cfg, tp_fk, tp_feedback == "on", tp_out, seed);
    if (et->parsed())
      return cmd_eval_track(cfg, et_actor, et_a2, et_a3, et_out, seed);
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nn::ModelIoError& e) {
    std::cerr << "model io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
