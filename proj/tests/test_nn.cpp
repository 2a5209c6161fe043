#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "crane/nn.hpp"

using namespace crane;
using namespace crane::nn;

namespace {

// Central finite differences over every parameter of the model.
// Returns the largest relative error against the analytic gradients.
double max_grad_rel_err(MlpModel model, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& t, double h = 1e-6) {
  Gradients analytic = mlp_backward(model, x, t).grads;
  double worst = 0.0;
  auto compare = [&](double* param, double analytic_g) {
    const double saved = *param;
    *param = saved + h;
    double up = mlp_mse_loss(model, x, t);
    *param = saved - h;
    double down = mlp_mse_loss(model, x, t);
    *param = saved;
    double fd = (up - down) / (2.0 * h);
    double denom = std::max({std::abs(fd), std::abs(analytic_g), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic_g) / denom);
  };
  for (int k = 0; k < model.layer_count(); ++k) {
    for (Eigen::Index i = 0; i < model.weights[k].size(); ++i)
      compare(model.weights[k].data() + i, analytic.weights[k].data()[i]);
    for (Eigen::Index i = 0; i < model.biases[k].size(); ++i)
      compare(model.biases[k].data() + i, analytic.biases[k].data()[i]);
  }
  return worst;
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const char* name) : path(name) {}
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("init is seed-deterministic with bounded weights and zero biases") {
  Rng a(42), b(42);
  MlpModel m1 = mlp_init({4, 256, 128, 3}, OutputActivation::kIdentity, a);
  MlpModel m2 = mlp_init({4, 256, 128, 3}, OutputActivation::kIdentity, b);
  CHECK(models_equal(m1, m2));

  for (int k = 0; k < m1.layer_count(); ++k) {
    const double bound = std::sqrt(6.0 / m1.layer_sizes[std::size_t(k)]);
    CHECK(m1.weights[k].array().abs().maxCoeff() <= bound);
    CHECK(m1.biases[k].isZero(0.0));
  }
  CHECK(m1.parameter_count() == std::size_t(4 * 256 + 256 + 256 * 128 + 128 +
                                            128 * 3 + 3));

  Rng r(1);
  CHECK_THROWS_AS(mlp_init({4}, OutputActivation::kIdentity, r),
                  std::invalid_argument);
  CHECK_THROWS_AS(mlp_init({4, 0, 3}, OutputActivation::kIdentity, r),
                  std::invalid_argument);
}

TEST_CASE("forward computes the affine/activation composition") {
  // zero parameters, identity output -> zero vector
  Rng rng(3);
  MlpModel zero = mlp_init({3, 5, 2}, OutputActivation::kIdentity, rng);
  for (auto& w : zero.weights) w.setZero();
  Eigen::VectorXd out = mlp_forward(zero, Eigen::Vector3d(1.0, -2.0, 3.0));
  CHECK(out.isZero(0.0));

  // single identity layer echoes the input
  MlpModel id = mlp_init({3, 3}, OutputActivation::kIdentity, rng);
  id.weights[0] = Eigen::MatrixXd::Identity(3, 3);
  id.biases[0].setZero();
  Eigen::Vector3d v(0.5, -1.5, 2.5);
  CHECK((mlp_forward(id, v) - v).norm() == 0.0);

  // random 2-3-1 net against a hand-evaluated composition
  MlpModel m = mlp_init({2, 3, 1}, OutputActivation::kIdentity, rng);
  Eigen::Vector2d x(0.7, -0.4);
  Eigen::Vector3d hidden = m.weights[0] * x + m.biases[0];
  for (int i = 0; i < 3; ++i) hidden[i] = std::max(0.0, hidden[i]);
  double expected = (m.weights[1] * hidden + m.biases[1])[0];
  CHECK(mlp_forward(m, x)[0] == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(mlp_forward(m, Eigen::Vector3d(1, 2, 3)),
                  std::invalid_argument);
}

TEST_CASE("standardization is applied on the way in and out") {
  Rng rng(8);
  MlpModel m = mlp_init({2, 2}, OutputActivation::kIdentity, rng);
  m.weights[0] = Eigen::MatrixXd::Identity(2, 2);
  m.input_mean << 1.0, -1.0;
  m.input_scale << 2.0, 4.0;
  m.target_mean << 10.0, 20.0;
  m.target_scale << 3.0, 5.0;
  Eigen::Vector2d x(3.0, 3.0);  // standardized: (1.0, 1.0)
  Eigen::VectorXd y = mlp_forward(m, x);
  CHECK(y[0] == doctest::Approx(10.0 + 3.0 * 1.0).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(20.0 + 5.0 * 1.0).epsilon(1e-15));
}

TEST_CASE("tanh head is bounded on (-1, 1) for any finite input") {
  Rng rng(15);
  MlpModel m = mlp_init({4, 16, 4}, OutputActivation::kTanh, rng);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x(4);
    for (int k = 0; k < 4; ++k) x[k] = rng.uniform(-1e4, 1e4);
    Eigen::VectorXd y = mlp_forward(m, x);
    for (int k = 0; k < 4; ++k) {
      CHECK(y[k] > -1.0);
      CHECK(y[k] < 1.0);
    }
  }
}

TEST_CASE("backward at a perfect fit gives zero loss and gradients") {
  Rng rng(9);
  MlpModel m = mlp_init({2, 4, 2}, OutputActivation::kIdentity, rng);
  Eigen::MatrixXd x(2, 3);
  x << 0.1, -0.5, 0.8, 0.3, 0.2, -0.9;
  Eigen::MatrixXd t = mlp_forward_batch(m, x);
  MseResult r = mlp_backward(m, x, t);
  CHECK(r.loss == 0.0);
  for (const auto& g : r.grads.weights) CHECK(g.isZero(0.0));
  for (const auto& g : r.grads.biases) CHECK(g.isZero(0.0));
}

TEST_CASE("output-layer bias gradient is linear in the residual") {
  Rng rng(10);
  MlpModel m = mlp_init({2, 4, 1}, OutputActivation::kIdentity, rng);
  Eigen::MatrixXd x(2, 1);
  x << 0.4, -0.2;
  Eigen::MatrixXd y = mlp_forward_batch(m, x);
  Eigen::MatrixXd t1 = y.array() + 0.3;
  Eigen::MatrixXd t2 = y.array() + 0.6;  // double the error
  auto g1 = mlp_backward(m, x, t1).grads;
  auto g2 = mlp_backward(m, x, t2).grads;
  CHECK(g2.biases.back()[0] ==
        doctest::Approx(2.0 * g1.biases.back()[0]).epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with central finite differences") {
  Rng rng(77);
  MlpModel m = mlp_init({3, 8, 8, 2}, OutputActivation::kIdentity, rng);
  Eigen::MatrixXd x(3, 5), t(2, 5);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
  for (int i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1, 1);
  CHECK(max_grad_rel_err(m, x, t) < 1e-4);

  // through a tanh head as well
  MlpModel mt = mlp_init({3, 8, 4}, OutputActivation::kTanh, rng);
  Eigen::MatrixXd tt(4, 5);
  for (int i = 0; i < tt.size(); ++i) tt.data()[i] = rng.uniform(-0.9, 0.9);
  CHECK(max_grad_rel_err(mt, x, tt) < 1e-4);

  // and with non-trivial standardizers
  MlpModel ms = mlp_init({3, 8, 2}, OutputActivation::kIdentity, rng);
  ms.input_mean << 0.5, -0.5, 1.0;
  ms.input_scale << 2.0, 0.5, 1.5;
  ms.target_mean << 1.0, -1.0;
  ms.target_scale << 0.25, 4.0;
  CHECK(max_grad_rel_err(ms, x, t) < 1e-4);
}

TEST_CASE("input gradients match finite differences") {
  Rng rng(31);
  MlpModel m = mlp_init({3, 8, 2}, OutputActivation::kIdentity, rng);
  m.input_mean << 0.1, 0.2, -0.3;
  m.input_scale << 1.5, 0.7, 2.0;
  Eigen::MatrixXd x(3, 2);
  x << 0.3, -0.1, 0.9, 0.4, -0.6, 0.2;
  Eigen::MatrixXd w(2, 2);  // arbitrary linear functional of the outputs
  w << 0.7, -0.3, 0.4, 1.1;

  ForwardCache cache = mlp_forward_cached(m, x);
  Eigen::MatrixXd din = mlp_input_gradient(m, cache, w);

  const double h = 1e-6;
  for (int i = 0; i < x.size(); ++i) {
    Eigen::MatrixXd xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    double up = mlp_forward_cached(m, xp).output_core().cwiseProduct(w).sum();
    double dn = mlp_forward_cached(m, xm).output_core().cwiseProduct(w).sum();
    double fd = (up - dn) / (2 * h);
    CHECK(din.data()[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("adam first step is minus lr times sign of the gradient") {
  Rng rng(12);
  MlpModel m = mlp_init({2, 3, 1}, OutputActivation::kIdentity, rng);
  MlpModel before = m;
  AdamState s = make_adam_state(m, 1e-3);

  Gradients zero = make_zero_gradients(m);
  adam_step(m, zero, s);
  CHECK(s.step == 1);
  CHECK(models_equal(m, before));  // zero gradient: no movement

  Gradients g = make_zero_gradients(m);
  s = make_adam_state(m, 1e-3);
  Rng grng(5);
  for (auto& gw : g.weights)
    for (int i = 0; i < gw.size(); ++i) gw.data()[i] = grng.uniform(-2, 2);
  adam_step(m, g, s);
  for (int k = 0; k < m.layer_count(); ++k)
    for (int i = 0; i < m.weights[k].size(); ++i) {
      double grad = g.weights[k].data()[i];
      if (std::abs(grad) <= 1e-12) continue;
      double delta = m.weights[k].data()[i] - before.weights[k].data()[i];
      CHECK(std::abs(delta + 1e-3 * (grad > 0 ? 1.0 : -1.0)) < 1e-8);
    }
}

TEST_CASE("fit converges on a linear target and is reproducible") {
  Rng data_rng(2);
  const int n = 200;
  Eigen::MatrixXd x(1, n), t(1, n);
  for (int i = 0; i < n; ++i) {
    x(0, i) = data_rng.uniform(-1, 1);
    t(0, i) = 2.0 * x(0, i);
  }

  auto run = [&]() {
    Rng init(42);
    MlpModel m = mlp_init({1, 8, 1}, OutputActivation::kIdentity, init);
    AdamState adam = make_adam_state(m, 1e-2);
    FitOptions opt;
    opt.epochs = 200;
    opt.batch_size = 32;
    Rng fit_rng(7);
    return std::make_pair(fit(m, x, t, opt, adam, fit_rng), m);
  };

  auto [hist1, m1] = run();
  auto [hist2, m2] = run();
  CHECK(hist1 == hist2);
  CHECK(models_equal(m1, m2));
  for (double loss : hist1) CHECK(std::isfinite(loss));
  CHECK(hist1.back() < 1e-3);

  // standardization was computed from the data
  CHECK(m1.input_mean[0] == doctest::Approx(x.mean()).epsilon(1e-12));

  AdamState adam = make_adam_state(m1, 1e-2);
  Rng r(1);
  Eigen::MatrixXd empty_x(1, 0), empty_t(1, 0);
  CHECK_THROWS_AS(fit(m1, empty_x, empty_t, FitOptions{}, adam, r),
                  std::invalid_argument);
}

TEST_CASE("model save/load round-trips exactly") {
  Rng rng(123);
  MlpModel m = mlp_init({4, 7, 3}, OutputActivation::kTanh, rng);
  m.input_mean << 0.1, -0.2, 0.3, 12345.678901234567;
  m.input_scale << 1.0, 2.0, 0.5, 1e-7;

  TempFile f("model_roundtrip.mlp");
  save_model(m, f.path);
  MlpModel loaded = load_model(f.path);
  CHECK(models_equal(m, loaded));

  // saving the loaded model reproduces the bytes
  TempFile f2("model_roundtrip2.mlp");
  save_model(loaded, f2.path);
  std::ifstream a(f.path, std::ios::binary), b(f2.path, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("model loading rejects corruption") {
  Rng rng(5);
  MlpModel m = mlp_init({2, 4, 1}, OutputActivation::kIdentity, rng);
  TempFile f("model_corrupt.mlp");
  save_model(m, f.path);

  // wrong magic
  {
    std::ifstream in(f.path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    bytes[0] = 'X';
    std::ofstream out(f.path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
  }
  CHECK_THROWS_WITH_AS(load_model(f.path), doctest::Contains("MLPV1"),
                       ModelIoError);

  // truncation
  save_model(m, f.path);
  {
    std::ifstream in(f.path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    bytes.resize(bytes.size() - 9);
    std::ofstream out(f.path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
  }
  CHECK_THROWS_WITH_AS(load_model(f.path), doctest::Contains("truncated"),
                       ModelIoError);

  // payload corruption fails the checksum
  save_model(m, f.path);
  {
    std::fstream io(f.path, std::ios::binary | std::ios::in | std::ios::out);
    io.seekp(-12, std::ios::end);
    char byte = 0x5a;
    io.write(&byte, 1);
  }
  CHECK_THROWS_WITH_AS(load_model(f.path), doctest::Contains("checksum"),
                       ModelIoError);
}
