#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "crane/env.hpp"
#include "crane/nn.hpp"
#include "crane/plant.hpp"
#include "crane/rng.hpp"

namespace crane::ddpg {

// Flattened agent state: observation(4) | achieved goal(3) | desired goal(3).
constexpr int kStateDim = 10;
constexpr int kActionDim = 4;

using State = std::array<double, kStateDim>;
using Action = std::array<double, kActionDim>;

State pack_state(const EnvState& s);

struct Transition {
  State state;
  Action action;  // normalized, components in [-1, 1]
  double reward = 0.0;
  State next_state;
};

// Fixed-capacity ring with strictly FIFO eviction and uniform
// with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  // Uniform batch with replacement; nullopt while the buffer holds fewer
  // than `batch` transitions (warm-up: callers skip the update). Consumes
  // no rng draws in the nullopt case.
  std::optional<std::vector<Transition>> sample(int batch, Rng& rng) const;

  // Oldest-first copy of the contents (test hook).
  std::vector<Transition> snapshot() const;

 private:
  std::vector<Transition> ring_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
};

// Discrete Ornstein-Uhlenbeck exploration noise:
//   x <- x + theta * (mu - x) + sigma * N(0, I).
struct OuNoise {
  double theta = 0.15;
  double sigma = 0.1;
  double mu = 0.0;
  Eigen::Vector4d x = Eigen::Vector4d::Zero();

  void reset() { x.setZero(); }
  // Advances the state and returns it. Draws 4 normals in component order.
  Eigen::Vector4d sample(Rng& rng);
};

// Affine map between normalized [-1, 1] actions and the joint-limit
// intervals: decode(-1) = lo, decode(+1) = hi, per joint.
class ActionCodec {
 public:
  explicit ActionCodec(const JointLimits& limits);
  JointVector decode(const Action& a) const;
  Action encode(const JointVector& q) const;

 private:
  std::array<double, kActionDim> lo_, hi_;
};

struct DdpgConfig {
  int episodes = 200;
  int steps_per_episode = 200;
  std::size_t buffer_capacity = 100000;
  int batch_size = 256;
  double gamma = 0.99;
  double tau = 1e-3;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double ou_sigma = 0.1;
  double ou_theta = 0.15;
  int n_candidates = 16;
  bool feedback = true;
  int hidden_units = 128;  // two hidden layers of this width, actor and critic
  int checkpoint_every = 0;  // episodes; 0 disables
  std::uint64_t seed = 0;
};

DdpgConfig ddpg_config_from_config(const Config& cfg);

// Actor maps state to a tanh-bounded normalized action; critic scores
// state|action pairs. Targets start as exact copies of the mains.
struct DdpgAgent {
  nn::MlpModel actor, critic;
  nn::MlpModel target_actor, target_critic;
  nn::AdamState actor_opt, critic_opt;
  double gamma = 0.99;
  double tau = 1e-3;
};

DdpgAgent make_agent(const DdpgConfig& cfg);

// Draws `n_candidates` noisy actions from the current policy (the shared
// noise state advances once per candidate), scores each by the forward
// network's predicted distance to the desired goal, and returns the argmin
// (ties to the lowest index). With a single candidate this is exactly the
// plain noisy actor action and the forward network is not consulted.
Action select_action_with_feedback(const DdpgAgent& agent, const State& state,
                                   const nn::MlpModel& fk_net,
                                   const ActionCodec& codec, int n_candidates,
                                   OuNoise& noise, Rng& rng);

// In-place soft update: target <- tau * main + (1 - tau) * target.
void soft_update(nn::MlpModel& target, const nn::MlpModel& main, double tau);

// Critic regression loss against the frozen targets, with its gradients.
// Exposed separately so the composed gradient can be finite-difference
// checked.
struct CriticLoss {
  double loss = 0.0;
  nn::Gradients grads;
};
CriticLoss critic_loss_and_grads(const DdpgAgent& agent,
                                 const std::vector<Transition>& batch);

// Mean critic value of the current policy over the batch states, with the
// actor gradients of its negative (the actor loss).
struct ActorObjective {
  double mean_q = 0.0;
  nn::Gradients grads;
};
ActorObjective actor_objective_and_grads(const DdpgAgent& agent,
                                         const std::vector<Transition>& batch);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_mean_q = 0.0;
};

// One critic step, one actor step, then soft updates of both targets.
UpdateStats update(DdpgAgent& agent, const std::vector<Transition>& batch);

struct TrainResult {
  std::vector<double> episode_rewards;
};

using CheckpointFn =
    std::function<void(int episode, const nn::MlpModel& actor)>;

// Full training loop. All randomness is derived from cfg.seed via named
// child streams ("env", "noise", "buffer"), so a feedback-on and a
// feedback-off run with the same seed see identical episode initializations.
// The noise state resets at every episode start.
TrainResult train(const ReachEnv& env, DdpgAgent& agent,
                  const nn::MlpModel& fk_net, const DdpgConfig& cfg,
                  const CheckpointFn& checkpoint = {});

}  // namespace crane::ddpg
