#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "crane/datasets.hpp"
#include "crane/nn.hpp"

namespace crane::surrogate {

struct TrainOptions {
  int epochs = 500;
  int batch_size = 64;
  double learning_rate = 1e-4;
  double train_fraction = 0.8;  // remainder is held out for validation
  std::uint64_t seed = 0;
};

TrainOptions actuator_train_options_from_config(const Config& cfg);
TrainOptions forward_train_options_from_config(const Config& cfg);

// Per-target-dimension fit quality. residuals(k, i) = target - prediction
// for sample i, output k. Oracle metrics compare predictions against an
// analytic reference instead of the (possibly noisy) labels.
struct ValidationReport {
  Eigen::VectorXd rmse;
  Eigen::VectorXd max_abs_err;
  Eigen::MatrixXd targets;
  Eigen::MatrixXd predictions;
  Eigen::MatrixXd residuals;  // targets - predictions
  std::optional<Eigen::VectorXd> oracle_rmse;
  std::optional<Eigen::VectorXd> oracle_max_abs_err;
};

using Oracle = std::function<Eigen::VectorXd(const Eigen::VectorXd& input)>;

ValidationReport validate(const nn::MlpModel& model,
                          const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets,
                          const Oracle& oracle = nullptr);

// Rows: one line per sample and output dimension, flattened sample-major.
// A `#`-prefixed summary block with per-target RMSE and max abs error
// follows the rows.
void write_report_csv(const std::filesystem::path& path,
                      const ValidationReport& report);

struct TrainedNet {
  nn::MlpModel model;
  ValidationReport heldout;
};

// Regression of cylinder length on joint angle from a manual-operation log.
// Joint 2 uses hidden layers 256-128-128, joint 3 uses 128-128; identity
// output, z-scored features, seeded 80/20 split.
TrainedNet train_actuator_net2(const std::vector<ActuatorSample>& log,
                               const TrainOptions& opt);
TrainedNet train_actuator_net3(const std::vector<ActuatorSample>& log,
                               const TrainOptions& opt);

// Joint-space to end-effector regression (4 -> 256 -> 128 -> 3).
// Needs at least 100 samples.
TrainedNet train_forward_net(const std::vector<FkSample>& data,
                             const TrainOptions& opt);

// Matrix views of the datasets (columns are samples).
Eigen::MatrixXd actuator_inputs(const std::vector<ActuatorSample>& log);
Eigen::MatrixXd actuator_targets(const std::vector<ActuatorSample>& log);
Eigen::MatrixXd fk_inputs(const std::vector<FkSample>& data);
Eigen::MatrixXd fk_targets(const std::vector<FkSample>& data);

}  // namespace crane::surrogate
