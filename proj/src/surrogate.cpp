#include "crane/surrogate.hpp"

#include <fstream>
#include <numeric>

namespace crane::surrogate {
namespace {

struct Split {
  Eigen::MatrixXd train_x, train_t, valid_x, valid_t;
};

Split split_dataset(const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                    double train_fraction, Rng& rng) {
  const int n = int(x.cols());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  const int n_train = std::max(1, int(train_fraction * n));
  std::vector<int> train_idx(order.begin(), order.begin() + n_train);
  std::vector<int> valid_idx(order.begin() + n_train, order.end());
  if (valid_idx.empty()) valid_idx.push_back(order.front());
  return {x(Eigen::all, train_idx), t(Eigen::all, train_idx),
          x(Eigen::all, valid_idx), t(Eigen::all, valid_idx)};
}

TrainedNet train_regression(const std::vector<int>& layer_sizes,
                            const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                            const TrainOptions& opt) {
  Rng split_rng(derive_seed(opt.seed, "split"));
  Split split = split_dataset(x, t, opt.train_fraction, split_rng);

  Rng init_rng(derive_seed(opt.seed, "init"));
  nn::MlpModel model =
      nn::mlp_init(layer_sizes, nn::OutputActivation::kIdentity, init_rng);
  nn::AdamState adam = nn::make_adam_state(model, opt.learning_rate);
  nn::FitOptions fit_opt;
  fit_opt.epochs = opt.epochs;
  fit_opt.batch_size = opt.batch_size;
  Rng fit_rng(derive_seed(opt.seed, "fit"));
  nn::fit(model, split.train_x, split.train_t, fit_opt, adam, fit_rng);

  TrainedNet out;
  out.heldout = validate(model, split.valid_x, split.valid_t);
  out.model = std::move(model);
  return out;
}

}  // namespace

TrainOptions actuator_train_options_from_config(const Config& cfg) {
  TrainOptions opt;
  opt.epochs = int(cfg.get_int("train.epochs"));
  opt.batch_size = int(cfg.get_int("train.batch_size"));
  opt.learning_rate = cfg.get_double("train.actuator_lr");
  opt.seed = std::uint64_t(cfg.get_int("seed"));
  return opt;
}

TrainOptions forward_train_options_from_config(const Config& cfg) {
  TrainOptions opt = actuator_train_options_from_config(cfg);
  opt.learning_rate = cfg.get_double("train.forward_lr");
  return opt;
}

ValidationReport validate(const nn::MlpModel& model,
                          const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets,
                          const Oracle& oracle) {
  if (inputs.cols() == 0)
    throw std::invalid_argument("validate: empty dataset");
  ValidationReport report;
  report.targets = targets;
  report.predictions = nn::mlp_forward_batch(model, inputs);
  report.residuals = targets - report.predictions;
  report.rmse =
      (report.residuals.array().square().rowwise().mean()).sqrt().matrix();
  report.max_abs_err = report.residuals.array().abs().rowwise().maxCoeff();

  if (oracle) {
    Eigen::MatrixXd reference(targets.rows(), targets.cols());
    for (Eigen::Index i = 0; i < inputs.cols(); ++i)
      reference.col(i) = oracle(inputs.col(i));
    Eigen::MatrixXd res = reference - report.predictions;
    report.oracle_rmse = (res.array().square().rowwise().mean()).sqrt().matrix();
    report.oracle_max_abs_err = res.array().abs().rowwise().maxCoeff();
  }
  return report;
}

void write_report_csv(const std::filesystem::path& path,
                      const ValidationReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << "sample_idx,target,prediction,abs_err\n";
  // rows are flattened sample-major: a k-output model emits k consecutive
  // lines per sample
  const Eigen::Index dims = report.residuals.rows();
  for (Eigen::Index i = 0; i < report.residuals.cols(); ++i)
    for (Eigen::Index k = 0; k < dims; ++k)
      out << i << ',' << io::format_double(report.targets(k, i)) << ','
          << io::format_double(report.predictions(k, i)) << ','
          << io::format_double(std::abs(report.residuals(k, i))) << '\n';
  for (Eigen::Index k = 0; k < dims; ++k)
    out << "# target " << k << ": rmse = " << io::format_double(report.rmse[k])
        << "  max_abs_err = " << io::format_double(report.max_abs_err[k])
        << '\n';
  if (!out) throw IoError("report write failed: " + path.string());
}

Eigen::MatrixXd actuator_inputs(const std::vector<ActuatorSample>& log) {
  Eigen::MatrixXd x(1, Eigen::Index(log.size()));
  for (std::size_t i = 0; i < log.size(); ++i)
    x(0, Eigen::Index(i)) = log[i].joint_angle;
  return x;
}

Eigen::MatrixXd actuator_targets(const std::vector<ActuatorSample>& log) {
  Eigen::MatrixXd t(1, Eigen::Index(log.size()));
  for (std::size_t i = 0; i < log.size(); ++i)
    t(0, Eigen::Index(i)) = log[i].cyl_len;
  return t;
}

Eigen::MatrixXd fk_inputs(const std::vector<FkSample>& data) {
  Eigen::MatrixXd x(4, Eigen::Index(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    x(0, Eigen::Index(i)) = data[i].q.j1;
    x(1, Eigen::Index(i)) = data[i].q.j2;
    x(2, Eigen::Index(i)) = data[i].q.j3;
    x(3, Eigen::Index(i)) = data[i].q.d4;
  }
  return x;
}

Eigen::MatrixXd fk_targets(const std::vector<FkSample>& data) {
  Eigen::MatrixXd t(3, Eigen::Index(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    t(0, Eigen::Index(i)) = data[i].ee.x;
    t(1, Eigen::Index(i)) = data[i].ee.y;
    t(2, Eigen::Index(i)) = data[i].ee.z;
  }
  return t;
}

TrainedNet train_actuator_net2(const std::vector<ActuatorSample>& log,
                               const TrainOptions& opt) {
  if (log.empty()) throw std::invalid_argument("train_actuator_net2: empty log");
  return train_regression({1, 256, 128, 128, 1}, actuator_inputs(log),
                          actuator_targets(log), opt);
}

TrainedNet train_actuator_net3(const std::vector<ActuatorSample>& log,
                               const TrainOptions& opt) {
  if (log.empty()) throw std::invalid_argument("train_actuator_net3: empty log");
  return train_regression({1, 128, 128, 1}, actuator_inputs(log),
                          actuator_targets(log), opt);
}

TrainedNet train_forward_net(const std::vector<FkSample>& data,
                             const TrainOptions& opt) {
  if (data.size() < 100)
    throw std::invalid_argument(
        "train_forward_net: need at least 100 samples, got " +
        std::to_string(data.size()));
  return train_regression({4, 256, 128, 3}, fk_inputs(data), fk_targets(data),
                          opt);
}

}  // namespace crane::surrogate
