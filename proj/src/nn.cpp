#include "crane/nn.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "crane/datasets.hpp"  // io::format_double

namespace crane::nn {
namespace {

void check_shapes(const MlpModel& m, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != m.input_size())
    throw std::invalid_argument("mlp: input has " +
                                std::to_string(inputs.rows()) +
                                " rows, model expects " +
                                std::to_string(m.input_size()));
}

Eigen::MatrixXd standardize_inputs(const MlpModel& m,
                                   const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd u = inputs.colwise() - m.input_mean;
  u.array().colwise() /= m.input_scale.array();
  return u;
}

Eigen::MatrixXd standardize_targets(const MlpModel& m,
                                    const Eigen::MatrixXd& targets) {
  Eigen::MatrixXd t = targets.colwise() - m.target_mean;
  t.array().colwise() /= m.target_scale.array();
  return t;
}

void apply_output_activation(const MlpModel& m, Eigen::MatrixXd& z) {
  if (m.output_activation == OutputActivation::kTanh)
    z = z.array().tanh().matrix();
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (int k = 0; k < layer_count(); ++k)
    n += std::size_t(weights[k].size()) + std::size_t(biases[k].size());
  return n;
}

bool MlpModel::same_shape(const MlpModel& other) const {
  return layer_sizes == other.layer_sizes &&
         output_activation == other.output_activation;
}

MlpModel mlp_init(const std::vector<int>& layer_sizes, OutputActivation out_act,
                  Rng& rng) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("mlp_init: need at least input and output layer");
  for (int w : layer_sizes)
    if (w < 1) throw std::invalid_argument("mlp_init: layer widths must be >= 1");

  MlpModel m;
  m.layer_sizes = layer_sizes;
  m.output_activation = out_act;
  const int n_layers = int(layer_sizes.size()) - 1;
  for (int k = 0; k < n_layers; ++k) {
    const int fan_in = layer_sizes[k];
    const int fan_out = layer_sizes[k + 1];
    const bool output_layer = (k == n_layers - 1);
    const double bound = output_layer ? std::sqrt(6.0 / (fan_in + fan_out))
                                      : std::sqrt(6.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  m.input_mean = Eigen::VectorXd::Zero(m.input_size());
  m.input_scale = Eigen::VectorXd::Ones(m.input_size());
  m.target_mean = Eigen::VectorXd::Zero(m.output_size());
  m.target_scale = Eigen::VectorXd::Ones(m.output_size());
  return m;
}

Eigen::MatrixXd mlp_forward_batch(const MlpModel& m,
                                  const Eigen::MatrixXd& inputs) {
  check_shapes(m, inputs);
  Eigen::MatrixXd a = standardize_inputs(m, inputs);
  for (int k = 0; k < m.layer_count(); ++k) {
    Eigen::MatrixXd z = (m.weights[k] * a).colwise() + m.biases[k];
    if (k + 1 < m.layer_count())
      a = z.cwiseMax(0.0);
    else {
      apply_output_activation(m, z);
      a = std::move(z);
    }
  }
  a.array().colwise() *= m.target_scale.array();
  a.colwise() += m.target_mean;
  return a;
}

Eigen::VectorXd mlp_forward(const MlpModel& m, const Eigen::VectorXd& input) {
  return mlp_forward_batch(m, input);
}

ForwardCache mlp_forward_cached(const MlpModel& m,
                                const Eigen::MatrixXd& inputs) {
  check_shapes(m, inputs);
  ForwardCache cache;
  cache.activations.reserve(m.layer_count() + 1);
  cache.activations.push_back(standardize_inputs(m, inputs));
  for (int k = 0; k < m.layer_count(); ++k) {
    Eigen::MatrixXd z =
        (m.weights[k] * cache.activations.back()).colwise() + m.biases[k];
    if (k + 1 < m.layer_count())
      cache.activations.push_back(z.cwiseMax(0.0));
    else {
      apply_output_activation(m, z);
      cache.activations.push_back(std::move(z));
    }
  }
  return cache;
}

Gradients make_zero_gradients(const MlpModel& m) {
  Gradients g;
  for (int k = 0; k < m.layer_count(); ++k) {
    g.weights.emplace_back(
        Eigen::MatrixXd::Zero(m.weights[k].rows(), m.weights[k].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(m.biases[k].size()));
  }
  return g;
}

namespace {

// Shared backward walk. Fills `grads` when non-null; fills `input_grad`
// (gradient w.r.t. raw inputs) when non-null.
void backprop_impl(const MlpModel& m, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_core_grad, Gradients* grads,
                   Eigen::MatrixXd* input_grad) {
  const int n_layers = m.layer_count();
  const Eigen::MatrixXd& y_core = cache.output_core();
  if (output_core_grad.rows() != y_core.rows() ||
      output_core_grad.cols() != y_core.cols())
    throw std::invalid_argument("mlp_backprop: output gradient shape mismatch");

  Eigen::MatrixXd delta;  // dL/dz of the current layer
  if (m.output_activation == OutputActivation::kTanh)
    delta = output_core_grad.cwiseProduct(
        (1.0 - y_core.array().square()).matrix());
  else
    delta = output_core_grad;

  for (int k = n_layers - 1; k >= 0; --k) {
    const Eigen::MatrixXd& a_prev = cache.activations[std::size_t(k)];
    if (grads) {
      grads->weights[k].noalias() = delta * a_prev.transpose();
      grads->biases[k] = delta.rowwise().sum();
    }
    if (k > 0) {
      Eigen::MatrixXd back = m.weights[k].transpose() * delta;
      // post-activation > 0 marks the active ReLU units
      delta = back.cwiseProduct(
          (a_prev.array() > 0.0).cast<double>().matrix());
    } else if (input_grad) {
      Eigen::MatrixXd back = m.weights[0].transpose() * delta;
      back.array().colwise() /= m.input_scale.array();
      *input_grad = std::move(back);
    }
  }
}

}  // namespace

Gradients mlp_backprop(const MlpModel& m, const ForwardCache& cache,
                       const Eigen::MatrixXd& output_core_grad,
                       Eigen::MatrixXd* input_grad) {
  Gradients grads = make_zero_gradients(m);
  backprop_impl(m, cache, output_core_grad, &grads, input_grad);
  return grads;
}

Eigen::MatrixXd mlp_input_gradient(const MlpModel& m, const ForwardCache& cache,
                                   const Eigen::MatrixXd& output_core_grad) {
  Eigen::MatrixXd input_grad;
  backprop_impl(m, cache, output_core_grad, nullptr, &input_grad);
  return input_grad;
}

MseResult mlp_backward(const MlpModel& m, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets) {
  if (targets.rows() != m.output_size() || targets.cols() != inputs.cols())
    throw std::invalid_argument("mlp_backward: target shape mismatch");
  ForwardCache cache = mlp_forward_cached(m, inputs);
  Eigen::MatrixXd residual = cache.output_core() - standardize_targets(m, targets);
  const double denom = double(targets.rows()) * double(targets.cols());
  MseResult result;
  result.loss = residual.squaredNorm() / denom;
  Eigen::MatrixXd grad_out = (2.0 / denom) * residual;
  result.grads = mlp_backprop(m, cache, grad_out);
  return result;
}

double mlp_mse_loss(const MlpModel& m, const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& targets) {
  ForwardCache cache = mlp_forward_cached(m, inputs);
  Eigen::MatrixXd residual = cache.output_core() - standardize_targets(m, targets);
  return residual.squaredNorm() /
         (double(targets.rows()) * double(targets.cols()));
}

AdamState make_adam_state(const MlpModel& m, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (int k = 0; k < m.layer_count(); ++k) {
    s.m_weights.emplace_back(
        Eigen::MatrixXd::Zero(m.weights[k].rows(), m.weights[k].cols()));
    s.v_weights.emplace_back(
        Eigen::MatrixXd::Zero(m.weights[k].rows(), m.weights[k].cols()));
    s.m_biases.emplace_back(Eigen::VectorXd::Zero(m.biases[k].size()));
    s.v_biases.emplace_back(Eigen::VectorXd::Zero(m.biases[k].size()));
  }
  return s;
}

void adam_step(MlpModel& m, const Gradients& grads, AdamState& s) {
  if (int(grads.weights.size()) != m.layer_count())
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, double(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, double(s.step));
  for (int k = 0; k < m.layer_count(); ++k) {
    if (grads.weights[k].rows() != m.weights[k].rows() ||
        grads.weights[k].cols() != m.weights[k].cols())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    s.m_weights[k] = s.beta1 * s.m_weights[k] + (1.0 - s.beta1) * grads.weights[k];
    s.v_weights[k].array() = s.beta2 * s.v_weights[k].array() +
                             (1.0 - s.beta2) * grads.weights[k].array().square();
    m.weights[k].array() -=
        s.learning_rate * (s.m_weights[k].array() / bc1) /
        ((s.v_weights[k].array() / bc2).sqrt() + s.epsilon);

    s.m_biases[k] = s.beta1 * s.m_biases[k] + (1.0 - s.beta1) * grads.biases[k];
    s.v_biases[k].array() = s.beta2 * s.v_biases[k].array() +
                            (1.0 - s.beta2) * grads.biases[k].array().square();
    m.biases[k].array() -=
        s.learning_rate * (s.m_biases[k].array() / bc1) /
        ((s.v_biases[k].array() / bc2).sqrt() + s.epsilon);
  }
}

std::vector<double> fit(MlpModel& m, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, const FitOptions& opt,
                        AdamState& adam, Rng& rng) {
  if (inputs.cols() == 0) throw std::invalid_argument("fit: empty dataset");
  if (targets.cols() != inputs.cols())
    throw std::invalid_argument("fit: inputs/targets sample count mismatch");
  check_shapes(m, inputs);

  if (opt.standardize) {
    const double n = double(inputs.cols());
    m.input_mean = inputs.rowwise().mean();
    m.input_scale =
        ((inputs.colwise() - m.input_mean).array().square().rowwise().sum() / n)
            .sqrt()
            .max(1e-12);
    if (m.output_activation == OutputActivation::kIdentity) {
      m.target_mean = targets.rowwise().mean();
      m.target_scale =
          ((targets.colwise() - m.target_mean).array().square().rowwise().sum() /
           n)
              .sqrt()
              .max(1e-12);
    }
  }

  const int n = int(inputs.cols());
  const int batch = std::max(1, std::min(opt.batch_size, n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> history;
  history.reserve(opt.epochs);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += batch) {
      const int nb = std::min(batch, n - start);
      std::vector<int> idx(order.begin() + start, order.begin() + start + nb);
      Eigen::MatrixXd xb = inputs(Eigen::all, idx);
      Eigen::MatrixXd tb = targets(Eigen::all, idx);
      MseResult r = mlp_backward(m, xb, tb);
      adam_step(m, r.grads, adam);
      loss_sum += r.loss * nb;
    }
    history.push_back(loss_sum / n);
  }
  return history;
}

namespace {

constexpr char kMagic[] = "MLPV1";

void append_vector_line(std::string& header, const char* name,
                        const Eigen::VectorXd& v) {
  header += name;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    header += ' ';
    header += io::format_double(v[i]);
  }
  header += '\n';
}

Eigen::VectorXd parse_vector_line(const std::string& line, const char* name,
                                  Eigen::Index expected) {
  std::istringstream in(line);
  std::string tag;
  in >> tag;
  if (tag != name)
    throw ModelIoError("model header: expected '" + std::string(name) +
                       "', got '" + tag + "'");
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i)
    if (!(in >> v[i]))
      throw ModelIoError("model header: short '" + std::string(name) + "' line");
  return v;
}

}  // namespace

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  std::string header = kMagic;
  header += '\n';
  header += "layers";
  for (int w : m.layer_sizes) header += ' ' + std::to_string(w);
  header += '\n';
  header += "output ";
  header += m.output_activation == OutputActivation::kTanh ? "tanh" : "identity";
  header += '\n';
  append_vector_line(header, "input_mean", m.input_mean);
  append_vector_line(header, "input_scale", m.input_scale);
  append_vector_line(header, "target_mean", m.target_mean);
  append_vector_line(header, "target_scale", m.target_scale);

  std::vector<double> payload;
  payload.reserve(m.parameter_count());
  for (int k = 0; k < m.layer_count(); ++k) {
    const auto& w = m.weights[k];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) payload.push_back(w(i, j));
    for (Eigen::Index i = 0; i < m.biases[k].size(); ++i)
      payload.push_back(m.biases[k][i]);
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  const std::size_t n_bytes = payload.size() * sizeof(double);
  std::uint32_t crc =
      std::uint32_t(crc32(crc32(0L, Z_NULL, 0), bytes, uInt(n_bytes)));
  unsigned char crc_le[4] = {
      static_cast<unsigned char>(crc & 0xff),
      static_cast<unsigned char>((crc >> 8) & 0xff),
      static_cast<unsigned char>((crc >> 16) & 0xff),
      static_cast<unsigned char>((crc >> 24) & 0xff)};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelIoError("cannot write model file: " + path.string());
  out.write(header.data(), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(bytes), std::streamsize(n_bytes));
  out.write(reinterpret_cast<const char*>(crc_le), 4);
  if (!out) throw ModelIoError("model write failed: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError("cannot open model file: " + path.string());

  auto read_line = [&]() {
    std::string line;
    if (!std::getline(in, line))
      throw ModelIoError("model file truncated in header: " + path.string());
    return line;
  };

  if (read_line() != kMagic)
    throw ModelIoError("not an MLPV1 model file: " + path.string());

  MlpModel m;
  {
    std::istringstream sizes(read_line());
    std::string tag;
    sizes >> tag;
    if (tag != "layers") throw ModelIoError("model header: missing layer sizes");
    int w;
    while (sizes >> w) m.layer_sizes.push_back(w);
    if (m.layer_sizes.size() < 2)
      throw ModelIoError("model header: fewer than two layers");
    for (int width : m.layer_sizes)
      if (width < 1) throw ModelIoError("model header: invalid layer width");
  }
  {
    std::istringstream act(read_line());
    std::string tag, kind;
    act >> tag >> kind;
    if (tag != "output" || (kind != "identity" && kind != "tanh"))
      throw ModelIoError("model header: bad output activation line");
    m.output_activation = (kind == "tanh") ? OutputActivation::kTanh
                                           : OutputActivation::kIdentity;
  }
  const Eigen::Index d_in = m.layer_sizes.front();
  const Eigen::Index d_out = m.layer_sizes.back();
  m.input_mean = parse_vector_line(read_line(), "input_mean", d_in);
  m.input_scale = parse_vector_line(read_line(), "input_scale", d_in);
  m.target_mean = parse_vector_line(read_line(), "target_mean", d_out);
  m.target_scale = parse_vector_line(read_line(), "target_scale", d_out);

  std::size_t n_params = 0;
  for (std::size_t k = 0; k + 1 < m.layer_sizes.size(); ++k)
    n_params += std::size_t(m.layer_sizes[k + 1]) *
                    std::size_t(m.layer_sizes[k]) +
                std::size_t(m.layer_sizes[k + 1]);

  std::vector<double> payload(n_params);
  in.read(reinterpret_cast<char*>(payload.data()),
          std::streamsize(n_params * sizeof(double)));
  if (std::size_t(in.gcount()) != n_params * sizeof(double))
    throw ModelIoError("model file truncated: " + path.string());

  unsigned char crc_le[4];
  in.read(reinterpret_cast<char*>(crc_le), 4);
  if (in.gcount() != 4)
    throw ModelIoError("model file truncated (missing checksum): " +
                       path.string());
  std::uint32_t stored = std::uint32_t(crc_le[0]) |
                         (std::uint32_t(crc_le[1]) << 8) |
                         (std::uint32_t(crc_le[2]) << 16) |
                         (std::uint32_t(crc_le[3]) << 24);
  std::uint32_t actual = std::uint32_t(
      crc32(crc32(0L, Z_NULL, 0),
            reinterpret_cast<const unsigned char*>(payload.data()),
            uInt(n_params * sizeof(double))));
  if (stored != actual)
    throw ModelIoError("model checksum mismatch: " + path.string());

  std::size_t pos = 0;
  for (std::size_t k = 0; k + 1 < m.layer_sizes.size(); ++k) {
    const Eigen::Index rows = m.layer_sizes[k + 1];
    const Eigen::Index cols = m.layer_sizes[k];
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = payload[pos++];
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) b[i] = payload[pos++];
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

bool models_equal(const MlpModel& a, const MlpModel& b) {
  if (!a.same_shape(b)) return false;
  for (int k = 0; k < a.layer_count(); ++k)
    if (a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) return false;
  return a.input_mean == b.input_mean && a.input_scale == b.input_scale &&
         a.target_mean == b.target_mean && a.target_scale == b.target_scale;
}

}  // namespace crane::nn
