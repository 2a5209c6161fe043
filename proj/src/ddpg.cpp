#include "crane/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crane::ddpg {
namespace {

Eigen::MatrixXd gather_states(const std::vector<Transition>& batch,
                              bool next) {
  Eigen::MatrixXd out(kStateDim, Eigen::Index(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const State& s = next ? batch[i].next_state : batch[i].state;
    for (int d = 0; d < kStateDim; ++d) out(d, Eigen::Index(i)) = s[d];
  }
  return out;
}

// state rows on top, action rows below: the critic input layout
Eigen::MatrixXd stack_state_action(const Eigen::MatrixXd& states,
                                   const Eigen::MatrixXd& actions) {
  Eigen::MatrixXd sa(kStateDim + kActionDim, states.cols());
  sa.topRows(kStateDim) = states;
  sa.bottomRows(kActionDim) = actions;
  return sa;
}

}  // namespace

State pack_state(const EnvState& s) {
  return {s.observation.j1,  s.observation.j2,  s.observation.j3,
          s.observation.d4,  s.achieved_goal.x, s.achieved_goal.y,
          s.achieved_goal.z, s.desired_goal.x,  s.desired_goal.y,
          s.desired_goal.z};
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  ring_.reserve(std::min<std::size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(const Transition& t) {
  if (size_ < capacity_) {
    ring_.push_back(t);
    ++size_;
  } else {
    ring_[cursor_] = t;  // overwrite the oldest
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::optional<std::vector<Transition>> ReplayBuffer::sample(int batch,
                                                            Rng& rng) const {
  if (batch < 1) throw std::invalid_argument("ReplayBuffer: batch must be >= 1");
  if (size_ < std::size_t(batch)) return std::nullopt;
  std::vector<Transition> out;
  out.reserve(std::size_t(batch));
  for (int i = 0; i < batch; ++i)
    out.push_back(ring_[std::size_t(rng.uniform_index(size_))]);
  return out;
}

std::vector<Transition> ReplayBuffer::snapshot() const {
  std::vector<Transition> out;
  out.reserve(size_);
  if (size_ < capacity_) {
    out = ring_;
  } else {
    for (std::size_t i = 0; i < capacity_; ++i)
      out.push_back(ring_[(cursor_ + i) % capacity_]);
  }
  return out;
}

Eigen::Vector4d OuNoise::sample(Rng& rng) {
  for (int i = 0; i < 4; ++i)
    x[i] += theta * (mu - x[i]) + sigma * rng.normal();
  return x;
}

ActionCodec::ActionCodec(const JointLimits& limits) {
  const Interval* iv[kActionDim] = {&limits.j1, &limits.j2, &limits.j3,
                                    &limits.d4};
  for (int i = 0; i < kActionDim; ++i) {
    lo_[i] = iv[i]->lo;
    hi_[i] = iv[i]->hi;
  }
}

JointVector ActionCodec::decode(const Action& a) const {
  auto map = [&](int i) {
    return lo_[i] + 0.5 * (a[i] + 1.0) * (hi_[i] - lo_[i]);
  };
  return {map(0), map(1), map(2), map(3)};
}

Action ActionCodec::encode(const JointVector& q) const {
  const double v[kActionDim] = {q.j1, q.j2, q.j3, q.d4};
  Action a;
  for (int i = 0; i < kActionDim; ++i)
    a[i] = 2.0 * (v[i] - lo_[i]) / (hi_[i] - lo_[i]) - 1.0;
  return a;
}

DdpgConfig ddpg_config_from_config(const Config& cfg) {
  DdpgConfig d;
  d.episodes = int(cfg.get_int("ddpg.episodes"));
  d.steps_per_episode = int(cfg.get_int("ddpg.steps"));
  d.buffer_capacity = std::size_t(cfg.get_int("ddpg.buffer_size"));
  d.batch_size = int(cfg.get_int("ddpg.batch_size"));
  d.gamma = cfg.get_double("ddpg.gamma");
  d.tau = cfg.get_double("ddpg.tau");
  d.actor_lr = cfg.get_double("ddpg.actor_lr");
  d.critic_lr = cfg.get_double("ddpg.critic_lr");
  d.ou_sigma = cfg.get_double("ddpg.ou_sigma");
  d.ou_theta = cfg.get_double("ddpg.ou_theta");
  d.n_candidates = int(cfg.get_int("ddpg.n_candidates"));
  d.hidden_units = int(cfg.get_int("ddpg.hidden_units"));
  d.checkpoint_every = int(cfg.get_int("ddpg.checkpoint_every"));
  d.seed = std::uint64_t(cfg.get_int("seed"));
  return d;
}

DdpgAgent make_agent(const DdpgConfig& cfg) {
  DdpgAgent agent;
  const int h = cfg.hidden_units;
  Rng actor_rng(derive_seed(cfg.seed, "actor_init"));
  Rng critic_rng(derive_seed(cfg.seed, "critic_init"));
  agent.actor = nn::mlp_init({kStateDim, h, h, kActionDim},
                             nn::OutputActivation::kTanh, actor_rng);
  agent.critic = nn::mlp_init({kStateDim + kActionDim, h, h, 1},
                              nn::OutputActivation::kIdentity, critic_rng);
  agent.target_actor = agent.actor;
  agent.target_critic = agent.critic;
  agent.actor_opt = nn::make_adam_state(agent.actor, cfg.actor_lr);
  agent.critic_opt = nn::make_adam_state(agent.critic, cfg.critic_lr);
  agent.gamma = cfg.gamma;
  agent.tau = cfg.tau;
  return agent;
}

Action select_action_with_feedback(const DdpgAgent& agent, const State& state,
                                   const nn::MlpModel& fk_net,
                                   const ActionCodec& codec, int n_candidates,
                                   OuNoise& noise, Rng& rng) {
  if (n_candidates < 1)
    throw std::invalid_argument("select_action: need at least one candidate");

  Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(state.data(), kStateDim);
  Eigen::VectorXd mu = nn::mlp_forward(agent.actor, s);

  auto make_candidate = [&]() {
    Eigen::Vector4d n = noise.sample(rng);
    Action a;
    for (int i = 0; i < kActionDim; ++i)
      a[i] = std::clamp(mu[i] + n[i], -1.0, 1.0);
    return a;
  };

  Action best = make_candidate();
  if (n_candidates == 1) return best;

  auto squared_goal_gap = [&](const Action& a) {
    JointVector q = codec.decode(a);
    Eigen::VectorXd joints(4);
    joints << q.j1, q.j2, q.j3, q.d4;
    Eigen::VectorXd predicted = nn::mlp_forward(fk_net, joints);
    const double dx = state[7] - predicted[0];
    const double dy = state[8] - predicted[1];
    const double dz = state[9] - predicted[2];
    return dx * dx + dy * dy + dz * dz;
  };

  double best_gap = squared_goal_gap(best);
  for (int p = 1; p < n_candidates; ++p) {
    Action a = make_candidate();
    double gap = squared_goal_gap(a);
    if (gap < best_gap) {  // strict: ties keep the earliest candidate
      best_gap = gap;
      best = a;
    }
  }
  return best;
}

void soft_update(nn::MlpModel& target, const nn::MlpModel& main, double tau) {
  if (!target.same_shape(main))
    throw std::invalid_argument("soft_update: shape mismatch");
  for (int k = 0; k < main.layer_count(); ++k) {
    target.weights[k] = tau * main.weights[k] + (1.0 - tau) * target.weights[k];
    target.biases[k] = tau * main.biases[k] + (1.0 - tau) * target.biases[k];
  }
}

CriticLoss critic_loss_and_grads(const DdpgAgent& agent,
                                 const std::vector<Transition>& batch) {
  if (batch.empty())
    throw std::invalid_argument("critic_loss_and_grads: empty batch");
  const Eigen::Index n = Eigen::Index(batch.size());

  Eigen::MatrixXd next_states = gather_states(batch, true);
  Eigen::MatrixXd next_actions =
      nn::mlp_forward_batch(agent.target_actor, next_states);
  Eigen::MatrixXd next_q = nn::mlp_forward_batch(
      agent.target_critic, stack_state_action(next_states, next_actions));

  Eigen::RowVectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
    y[i] = batch[std::size_t(i)].reward + agent.gamma * next_q(0, i);

  Eigen::MatrixXd states = gather_states(batch, false);
  Eigen::MatrixXd actions(kActionDim, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < kActionDim; ++d)
      actions(d, i) = batch[std::size_t(i)].action[std::size_t(d)];

  nn::ForwardCache cache = nn::mlp_forward_cached(
      agent.critic, stack_state_action(states, actions));
  Eigen::MatrixXd residual = cache.output_core() - y;

  CriticLoss out;
  out.loss = residual.squaredNorm() / double(n);
  Eigen::MatrixXd grad_out = (2.0 / double(n)) * residual;
  out.grads = nn::mlp_backprop(agent.critic, cache, grad_out);
  return out;
}

ActorObjective actor_objective_and_grads(const DdpgAgent& agent,
                                         const std::vector<Transition>& batch) {
  if (batch.empty())
    throw std::invalid_argument("actor_objective_and_grads: empty batch");
  const Eigen::Index n = Eigen::Index(batch.size());

  Eigen::MatrixXd states = gather_states(batch, false);
  nn::ForwardCache actor_cache = nn::mlp_forward_cached(agent.actor, states);
  const Eigen::MatrixXd& policy_actions = actor_cache.output_core();

  nn::ForwardCache critic_cache = nn::mlp_forward_cached(
      agent.critic, stack_state_action(states, policy_actions));

  ActorObjective out;
  out.mean_q = critic_cache.output_core().mean();

  // d(mean Q)/d(state|action) without critic parameter gradients, then keep
  // the action rows and descend the negative objective.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(1, n, 1.0 / double(n));
  Eigen::MatrixXd dq_dsa =
      nn::mlp_input_gradient(agent.critic, critic_cache, ones);
  Eigen::MatrixXd dloss_daction = -dq_dsa.bottomRows(kActionDim);
  out.grads = nn::mlp_backprop(agent.actor, actor_cache, dloss_daction);
  return out;
}

UpdateStats update(DdpgAgent& agent, const std::vector<Transition>& batch) {
  CriticLoss critic = critic_loss_and_grads(agent, batch);
  nn::adam_step(agent.critic, critic.grads, agent.critic_opt);

  ActorObjective actor = actor_objective_and_grads(agent, batch);
  nn::adam_step(agent.actor, actor.grads, agent.actor_opt);

  soft_update(agent.target_critic, agent.critic, agent.tau);
  soft_update(agent.target_actor, agent.actor, agent.tau);
  return {critic.loss, actor.mean_q};
}

TrainResult train(const ReachEnv& env, DdpgAgent& agent,
                  const nn::MlpModel& fk_net, const DdpgConfig& cfg,
                  const CheckpointFn& checkpoint) {
  Rng env_rng(derive_seed(cfg.seed, "env"));
  Rng noise_rng(derive_seed(cfg.seed, "noise"));
  Rng buffer_rng(derive_seed(cfg.seed, "buffer"));

  ReplayBuffer buffer(cfg.buffer_capacity);
  ActionCodec codec(env.params().chain.limits);
  OuNoise noise;
  noise.theta = cfg.ou_theta;
  noise.sigma = cfg.ou_sigma;

  const int n_candidates = cfg.feedback ? cfg.n_candidates : 1;

  TrainResult result;
  result.episode_rewards.reserve(std::size_t(cfg.episodes));
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    EnvState state = env.reset(env_rng);
    noise.reset();
    double episode_reward = 0.0;
    for (int t = 0; t < cfg.steps_per_episode; ++t) {
      State packed = pack_state(state);
      Action a = select_action_with_feedback(agent, packed, fk_net, codec,
                                             n_candidates, noise, noise_rng);
      StepResult sr = env.step(state, codec.decode(a));
      buffer.push({packed, a, sr.reward, pack_state(sr.next_state)});
      if (auto batch = buffer.sample(cfg.batch_size, buffer_rng))
        update(agent, *batch);
      episode_reward += sr.reward;
      state = sr.next_state;
    }
    result.episode_rewards.push_back(episode_reward);
    if (checkpoint && cfg.checkpoint_every > 0 &&
        (episode + 1) % cfg.checkpoint_every == 0)
      checkpoint(episode + 1, agent.actor);
  }
  return result;
}

}  // namespace crane::ddpg
