#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "crane/rng.hpp"

namespace crane::nn {

enum class OutputActivation { kIdentity, kTanh };

// Dense multilayer perceptron with ReLU hidden units, double precision
// throughout. Inputs and targets may carry per-feature standardization
// (z-score of the training split); it is baked into the model, applied
// automatically on inference, and saved with the parameters. The core
// network always operates in standardized space.
struct MlpModel {
  std::vector<int> layer_sizes;  // input, hidden..., output widths
  std::vector<Eigen::MatrixXd> weights;  // weights[k]: (sizes[k+1], sizes[k])
  std::vector<Eigen::VectorXd> biases;
  OutputActivation output_activation = OutputActivation::kIdentity;

  Eigen::VectorXd input_mean, input_scale;    // u = (x - mean) / scale
  Eigen::VectorXd target_mean, target_scale;  // y = core * scale + mean

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int layer_count() const { return int(weights.size()); }
  std::size_t parameter_count() const;
  bool same_shape(const MlpModel& other) const;
};

// He-uniform hidden layers (bound sqrt(6/fan_in)), Xavier-uniform output
// layer, biases zero, standardization identity. Deterministic under the rng
// seed: weights are drawn row-major, layer by layer.
MlpModel mlp_init(const std::vector<int>& layer_sizes, OutputActivation out_act,
                  Rng& rng);

Eigen::VectorXd mlp_forward(const MlpModel& m, const Eigen::VectorXd& input);

// Columns are samples.
Eigen::MatrixXd mlp_forward_batch(const MlpModel& m, const Eigen::MatrixXd& inputs);

// Post-activation values kept for backprop. activations[0] is the
// standardized input, activations[k] the output of layer k; the last entry
// is the core output (before target de-standardization).
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;
  const Eigen::MatrixXd& output_core() const { return activations.back(); }
};

ForwardCache mlp_forward_cached(const MlpModel& m, const Eigen::MatrixXd& inputs);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

Gradients make_zero_gradients(const MlpModel& m);

// Backprop an arbitrary gradient on the core output through the network.
// Returns parameter gradients; when `input_grad` is non-null it receives the
// gradient with respect to the raw (pre-standardization) inputs.
Gradients mlp_backprop(const MlpModel& m, const ForwardCache& cache,
                       const Eigen::MatrixXd& output_core_grad,
                       Eigen::MatrixXd* input_grad = nullptr);

// Gradient with respect to the raw inputs only, skipping the parameter
// gradients (cheaper; used for the policy-gradient path).
Eigen::MatrixXd mlp_input_gradient(const MlpModel& m, const ForwardCache& cache,
                                   const Eigen::MatrixXd& output_core_grad);

// Mean squared error in standardized space: mean over output dimensions and
// over the batch. Returns the loss and the parameter gradients.
struct MseResult {
  double loss = 0.0;
  Gradients grads;
};
MseResult mlp_backward(const MlpModel& m, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets);

// Loss only; the finite-difference side of gradient checks.
double mlp_mse_loss(const MlpModel& m, const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& targets);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;
};

AdamState make_adam_state(const MlpModel& m, double learning_rate);

// One bias-corrected Adam update in place.
void adam_step(MlpModel& m, const Gradients& grads, AdamState& s);

struct FitOptions {
  int epochs = 500;
  int batch_size = 64;
  // Compute per-feature input/target z-scores from the data passed to fit and
  // store them in the model. Target standardization is skipped for tanh
  // heads (their output is already bounded).
  bool standardize = true;
};

// Mini-batch training with in-epoch Fisher-Yates shuffling from `rng`.
// Returns the mean training loss per epoch (standardized space).
std::vector<double> fit(MlpModel& m, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, const FitOptions& opt,
                        AdamState& adam, Rng& rng);

struct ModelIoError : std::runtime_error {
  explicit ModelIoError(const std::string& what) : std::runtime_error(what) {}
};

// MLPV1 container: text header (magic, layer sizes, output activation,
// standardization vectors), then parameters as little-endian doubles in
// layer order (weights row-major, then bias), then a CRC32 of that payload.
void save_model(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

bool models_equal(const MlpModel& a, const MlpModel& b);

}  // namespace crane::nn
