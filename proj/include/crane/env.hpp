#pragma once

#include <optional>

#include "crane/plant.hpp"
#include "crane/rng.hpp"

namespace crane {

// Reward shaping constants: a per-step bonus, a goal-distance term with its
// own bonus, and a penalty subtracted once per joint outside its limits.
struct RewardParams {
  double r_step = 0.001;
  double dist_bonus = 0.002;
  double jlim_penalty = 0.0005;
};

RewardParams reward_from_config(const Config& cfg);

struct RewardBreakdown {
  double step_term = 0.0;
  double dist_term = 0.0;
  double jlim_term = 0.0;
  double total() const { return step_term + dist_term + jlim_term; }
};

// r = r_step + (dist_bonus - |desired - achieved|) - jlim_penalty per
// violating joint of `action`. Maximum value r_step + dist_bonus, attained
// exactly at zero distance with no violations.
RewardBreakdown compute_reward(const JointVector& action,
                               const EePosition& achieved,
                               const EePosition& desired,
                               const RewardParams& params,
                               const ChainParams& chain);

// Goal-conditioned state: joint observation plus current and target
// end-effector positions. achieved_goal is always the chain map of
// observation.
struct EnvState {
  JointVector observation;
  EePosition achieved_goal;
  EePosition desired_goal;
};

struct StepInfo {
  double distance_to_goal = 0.0;
  LimitVerdicts limits;  // verdicts on the raw commanded action
};

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  RewardBreakdown reward_parts;
  StepInfo info;
};

struct EnvParams {
  ChainParams chain;
  RewardParams reward;
  // Commands are clamped to the limits widened by this fraction of each
  // joint's range; the raw action still pays the limit penalty.
  double limit_margin_fraction = 0.05;
  // Per-step rate clamp (stability guard at the 100 Hz step scale).
  double max_step_delta_revolute = 0.05;  // radians
  double max_step_delta_prismatic = 0.02;  // meters
  bool rate_clamp_enabled = true;
};

EnvParams env_params_from_config(const Config& cfg);

// Reaching environment over the analytic plant. Stateless value machine:
// reset/step are const and deterministic, episodes live in the caller.
class ReachEnv {
 public:
  explicit ReachEnv(EnvParams params);

  // Random start configuration; the goal defaults to the chain map of a
  // second random configuration, so it is always reachable. Draw order:
  // observation first, then the goal configuration.
  EnvState reset(Rng& rng, std::optional<EePosition> goal = std::nullopt) const;

  // Applies the commanded joint vector (margin clamp, then rate clamp
  // against the current observation) and scores the raw action.
  // Throws std::invalid_argument on non-finite actions.
  StepResult step(const EnvState& state, const JointVector& action) const;

  const EnvParams& params() const { return params_; }

 private:
  EnvParams params_;
};

double goal_distance(const EePosition& a, const EePosition& b);

}  // namespace crane
