#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "crane/ddpg.hpp"
#include "crane/env.hpp"
#include "crane/nn.hpp"

namespace crane::eval {

enum class TrajectoryKind { kCircle, kHelix };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kHelix;
  EePosition center;
  double radius = 0.25;
  double pitch = 0.0;  // z advance per turn (helix only)
  double turns = 1.0;
  int n_points = 200;
};

TrajectorySpec trajectory_from_config(const Config& cfg);

// Waypoints at phase 2*pi*turns*i/n_points, i = 0..n_points-1; the first
// point sits at phase zero. Every waypoint must pass the reach check
// (inside the ball of radius l2+l3+d4max around the boom pivot); the first
// offending waypoint is named in the error.
std::vector<EePosition> make_trajectory(const TrajectorySpec& spec,
                                        const ChainParams& chain);

bool within_reach(const EePosition& p, const ChainParams& chain);

struct AxisMetrics {
  std::array<double, 3> rmse{};
  std::array<double, 3> max_abs_err{};
};

// Per-axis RMSE and max abs error between equal-length position series.
AxisMetrics compute_metrics(std::span<const EePosition> target,
                            std::span<const EePosition> achieved);

struct TrackingReport {
  std::vector<EePosition> targets;
  std::vector<EePosition> achieved;
  std::vector<JointVector> joints;  // executed configuration per waypoint
  std::vector<std::array<double, 3>> errors;  // target - achieved, per axis
  AxisMetrics metrics;
};

using Policy = std::function<ddpg::Action(const EnvState&)>;

// Closed-loop waypoint tracking with a frozen deterministic policy: per
// waypoint the desired goal is set and `steps_per_waypoint` policy steps run
// (no exploration noise, no candidate feedback); the final position is
// scored against the waypoint.
TrackingReport track(const Policy& policy, const ReachEnv& env,
                     std::span<const EePosition> waypoints,
                     const ddpg::ActionCodec& codec, int steps_per_waypoint,
                     Rng& rng);

// Same, with the policy read from a trained actor model.
TrackingReport track(const nn::MlpModel& actor, const ReachEnv& env,
                     std::span<const EePosition> waypoints,
                     const ddpg::ActionCodec& codec, int steps_per_waypoint,
                     Rng& rng);

// One valve command per input configuration: slew angle and telescope pass
// through, cylinder lengths for joints 2 and 3 come from the actuator
// networks. Rows with a joint outside the linkage's trained angle range are
// flagged but still emitted.
struct ValveRow {
  double j1 = 0.0;
  double cyl2_len = 0.0;
  double cyl3_len = 0.0;
  double d4 = 0.0;
  bool out_of_range = false;
};

std::vector<ValveRow> export_valve_commands(
    std::span<const JointVector> joint_trajectory, const nn::MlpModel& net2,
    const CylinderGeometry& geom2, const nn::MlpModel& net3,
    const CylinderGeometry& geom3);

// idx,tx,ty,tz,ax,ay,az,ex,ey,ez — one row per waypoint.
void write_tracking_csv(const std::filesystem::path& path,
                        const TrackingReport& report);
// Per-axis RMSE / max abs error lines, meters.
void write_tracking_summary(const std::filesystem::path& path,
                            const TrackingReport& report);
void write_valve_csv(const std::filesystem::path& path,
                     std::span<const ValveRow> rows);

}  // namespace crane::eval
