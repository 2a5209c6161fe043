#include "crane/env.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace crane {
namespace {

double clamp_delta(double current, double commanded, double max_delta) {
  return current + std::clamp(commanded - current, -max_delta, max_delta);
}

}  // namespace

RewardParams reward_from_config(const Config& cfg) {
  return {cfg.get_double("reward.r_step"), cfg.get_double("reward.dist_bonus"),
          cfg.get_double("reward.jlim_penalty")};
}

EnvParams env_params_from_config(const Config& cfg) {
  EnvParams p;
  p.chain = chain_params_from_config(cfg);
  p.reward = reward_from_config(cfg);
  p.limit_margin_fraction = cfg.get_double("env.limit_margin_fraction");
  p.max_step_delta_revolute = cfg.get_double("env.max_step_delta_revolute");
  p.max_step_delta_prismatic = cfg.get_double("env.max_step_delta_prismatic");
  p.rate_clamp_enabled = cfg.get_bool("env.rate_clamp");
  return p;
}

double goal_distance(const EePosition& a, const EePosition& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

RewardBreakdown compute_reward(const JointVector& action,
                               const EePosition& achieved,
                               const EePosition& desired,
                               const RewardParams& params,
                               const ChainParams& chain) {
  RewardBreakdown r;
  r.step_term = params.r_step;
  r.dist_term = params.dist_bonus - goal_distance(desired, achieved);
  r.jlim_term =
      -params.jlim_penalty * within_limits(action, chain).violation_count();
  return r;
}

ReachEnv::ReachEnv(EnvParams params) : params_(std::move(params)) {
  params_.chain.validate();
}

EnvState ReachEnv::reset(Rng& rng, std::optional<EePosition> goal) const {
  EnvState s;
  s.observation = sample_random_config(rng, params_.chain);
  s.achieved_goal = forward_kinematics(s.observation, params_.chain);
  s.desired_goal =
      goal ? *goal
           : forward_kinematics(sample_random_config(rng, params_.chain),
                                params_.chain);
  return s;
}

StepResult ReachEnv::step(const EnvState& state,
                          const JointVector& action) const {
  if (!(std::isfinite(action.j1) && std::isfinite(action.j2) &&
        std::isfinite(action.j3) && std::isfinite(action.d4)))
    throw std::invalid_argument("ReachEnv::step: non-finite action");

  const JointLimits& lim = params_.chain.limits;
  const double m = params_.limit_margin_fraction;
  JointVector cmd;
  cmd.j1 = std::clamp(action.j1, lim.j1.lo - m * lim.j1.range(),
                      lim.j1.hi + m * lim.j1.range());
  cmd.j2 = std::clamp(action.j2, lim.j2.lo - m * lim.j2.range(),
                      lim.j2.hi + m * lim.j2.range());
  cmd.j3 = std::clamp(action.j3, lim.j3.lo - m * lim.j3.range(),
                      lim.j3.hi + m * lim.j3.range());
  cmd.d4 = std::clamp(action.d4, lim.d4.lo - m * lim.d4.range(),
                      lim.d4.hi + m * lim.d4.range());

  if (params_.rate_clamp_enabled) {
    const JointVector& cur = state.observation;
    cmd.j1 = clamp_delta(cur.j1, cmd.j1, params_.max_step_delta_revolute);
    cmd.j2 = clamp_delta(cur.j2, cmd.j2, params_.max_step_delta_revolute);
    cmd.j3 = clamp_delta(cur.j3, cmd.j3, params_.max_step_delta_revolute);
    cmd.d4 = clamp_delta(cur.d4, cmd.d4, params_.max_step_delta_prismatic);
  }

  StepResult result;
  result.next_state.observation = cmd;
  result.next_state.achieved_goal = forward_kinematics(cmd, params_.chain);
  result.next_state.desired_goal = state.desired_goal;
  assert(goal_distance(result.next_state.achieved_goal,
                       forward_kinematics(result.next_state.observation,
                                          params_.chain)) == 0.0);

  result.reward_parts =
      compute_reward(action, result.next_state.achieved_goal,
                     state.desired_goal, params_.reward, params_.chain);
  result.reward = result.reward_parts.total();
  result.info.distance_to_goal =
      goal_distance(state.desired_goal, result.next_state.achieved_goal);
  result.info.limits = within_limits(action, params_.chain);
  return result;
}

}  // namespace crane
