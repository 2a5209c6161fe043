#include "crane/eval.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "crane/datasets.hpp"  // io::format_double, IoError

namespace crane::eval {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

TrajectorySpec trajectory_from_config(const Config& cfg) {
  TrajectorySpec spec;
  const std::string& kind = cfg.get_string("eval.kind");
  if (kind == "circle")
    spec.kind = TrajectoryKind::kCircle;
  else if (kind == "helix")
    spec.kind = TrajectoryKind::kHelix;
  else
    throw ConfigError("eval.kind must be 'circle' or 'helix', got '" + kind +
                      "'");
  spec.center = {cfg.get_double("eval.center_x"), cfg.get_double("eval.center_y"),
                 cfg.get_double("eval.center_z")};
  spec.radius = cfg.get_double("eval.radius");
  spec.pitch = cfg.get_double("eval.pitch");
  spec.turns = cfg.get_double("eval.turns");
  spec.n_points = int(cfg.get_int("eval.n_points"));
  return spec;
}

bool within_reach(const EePosition& p, const ChainParams& chain) {
  const double dx = p.x;
  const double dy = p.y;
  const double dz = p.z - chain.h0;
  const double reach = chain.reach_radius();
  return dx * dx + dy * dy + dz * dz <= reach * reach;
}

std::vector<EePosition> make_trajectory(const TrajectorySpec& spec,
                                        const ChainParams& chain) {
  if (!(spec.radius > 0.0))
    throw std::invalid_argument("trajectory: radius must be positive");
  if (spec.n_points < 2)
    throw std::invalid_argument("trajectory: need at least two points");

  std::vector<EePosition> points;
  points.reserve(std::size_t(spec.n_points));
  for (int i = 0; i < spec.n_points; ++i) {
    const double phase = kTwoPi * spec.turns * double(i) / double(spec.n_points);
    EePosition p;
    p.x = spec.center.x + spec.radius * std::cos(phase);
    p.y = spec.center.y + spec.radius * std::sin(phase);
    p.z = spec.center.z;
    if (spec.kind == TrajectoryKind::kHelix)
      p.z += spec.pitch * phase / kTwoPi;
    if (!within_reach(p, chain))
      throw std::invalid_argument(
          "trajectory: waypoint " + std::to_string(i) + " at (" +
          io::format_double(p.x) + ", " + io::format_double(p.y) + ", " +
          io::format_double(p.z) + ") is outside the reachable workspace");
    points.push_back(p);
  }
  return points;
}

AxisMetrics compute_metrics(std::span<const EePosition> target,
                            std::span<const EePosition> achieved) {
  if (target.size() != achieved.size())
    throw std::invalid_argument("compute_metrics: series length mismatch");
  if (target.empty())
    throw std::invalid_argument("compute_metrics: empty series");

  AxisMetrics m;
  std::array<double, 3> sq_sum{};
  for (std::size_t i = 0; i < target.size(); ++i) {
    const std::array<double, 3> err = {target[i].x - achieved[i].x,
                                       target[i].y - achieved[i].y,
                                       target[i].z - achieved[i].z};
    for (int k = 0; k < 3; ++k) {
      sq_sum[k] += err[k] * err[k];
      m.max_abs_err[k] = std::max(m.max_abs_err[k], std::abs(err[k]));
    }
  }
  for (int k = 0; k < 3; ++k)
    m.rmse[k] = std::sqrt(sq_sum[k] / double(target.size()));
  return m;
}

TrackingReport track(const Policy& policy, const ReachEnv& env,
                     std::span<const EePosition> waypoints,
                     const ddpg::ActionCodec& codec, int steps_per_waypoint,
                     Rng& rng) {
  if (waypoints.empty())
    throw std::invalid_argument("track: empty waypoint list");
  if (steps_per_waypoint < 1)
    throw std::invalid_argument("track: steps_per_waypoint must be >= 1");

  TrackingReport report;
  report.targets.assign(waypoints.begin(), waypoints.end());

  EnvState state = env.reset(rng, waypoints.front());
  for (const EePosition& wp : waypoints) {
    state.desired_goal = wp;
    for (int k = 0; k < steps_per_waypoint; ++k) {
      ddpg::Action a = policy(state);
      state = env.step(state, codec.decode(a)).next_state;
    }
    report.achieved.push_back(state.achieved_goal);
    report.joints.push_back(state.observation);
    report.errors.push_back({wp.x - state.achieved_goal.x,
                             wp.y - state.achieved_goal.y,
                             wp.z - state.achieved_goal.z});
  }
  report.metrics = compute_metrics(report.targets, report.achieved);
  return report;
}

TrackingReport track(const nn::MlpModel& actor, const ReachEnv& env,
                     std::span<const EePosition> waypoints,
                     const ddpg::ActionCodec& codec, int steps_per_waypoint,
                     Rng& rng) {
  Policy policy = [&actor](const EnvState& s) {
    ddpg::State packed = ddpg::pack_state(s);
    Eigen::VectorXd in =
        Eigen::Map<const Eigen::VectorXd>(packed.data(), ddpg::kStateDim);
    Eigen::VectorXd out = nn::mlp_forward(actor, in);
    ddpg::Action a;
    for (int i = 0; i < ddpg::kActionDim; ++i) a[i] = out[i];
    return a;
  };
  return track(policy, env, waypoints, codec, steps_per_waypoint, rng);
}

std::vector<ValveRow> export_valve_commands(
    std::span<const JointVector> joint_trajectory, const nn::MlpModel& net2,
    const CylinderGeometry& geom2, const nn::MlpModel& net3,
    const CylinderGeometry& geom3) {
  const Interval range2 = geom2.induced_joint_range();
  const Interval range3 = geom3.induced_joint_range();

  std::vector<ValveRow> rows;
  rows.reserve(joint_trajectory.size());
  Eigen::VectorXd in(1);
  for (const JointVector& q : joint_trajectory) {
    ValveRow row;
    row.j1 = q.j1;
    row.d4 = q.d4;
    in[0] = q.j2;
    row.cyl2_len = nn::mlp_forward(net2, in)[0];
    in[0] = q.j3;
    row.cyl3_len = nn::mlp_forward(net3, in)[0];
    row.out_of_range = !range2.contains(q.j2) || !range3.contains(q.j3);
    rows.push_back(row);
  }
  return rows;
}

void write_tracking_csv(const std::filesystem::path& path,
                        const TrackingReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tracking report: " + path.string());
  out << "idx,tx,ty,tz,ax,ay,az,ex,ey,ez\n";
  for (std::size_t i = 0; i < report.targets.size(); ++i) {
    const EePosition& t = report.targets[i];
    const EePosition& a = report.achieved[i];
    const auto& e = report.errors[i];
    out << i << ',' << io::format_double(t.x) << ',' << io::format_double(t.y)
        << ',' << io::format_double(t.z) << ',' << io::format_double(a.x) << ','
        << io::format_double(a.y) << ',' << io::format_double(a.z) << ','
        << io::format_double(e[0]) << ',' << io::format_double(e[1]) << ','
        << io::format_double(e[2]) << '\n';
  }
  if (!out) throw IoError("tracking report write failed: " + path.string());
}

void write_tracking_summary(const std::filesystem::path& path,
                            const TrackingReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tracking summary: " + path.string());
  const char* axis_names[3] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k)
    out << "rmse_" << axis_names[k] << "_m = "
        << io::format_double(report.metrics.rmse[std::size_t(k)]) << '\n';
  for (int k = 0; k < 3; ++k)
    out << "max_abs_err_" << axis_names[k] << "_m = "
        << io::format_double(report.metrics.max_abs_err[std::size_t(k)]) << '\n';
  if (!out) throw IoError("tracking summary write failed: " + path.string());
}

void write_valve_csv(const std::filesystem::path& path,
                     std::span<const ValveRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write valve commands: " + path.string());
  out << "idx,j1,cyl2_len,cyl3_len,d4,out_of_range\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ValveRow& r = rows[i];
    out << i << ',' << io::format_double(r.j1) << ','
        << io::format_double(r.cyl2_len) << ',' << io::format_double(r.cyl3_len)
        << ',' << io::format_double(r.d4) << ',' << (r.out_of_range ? 1 : 0)
        << '\n';
  }
  if (!out) throw IoError("valve command write failed: " + path.string());
}

}  // namespace crane::eval
