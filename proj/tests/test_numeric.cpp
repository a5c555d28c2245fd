#include <doctest.h>

#include <cmath>

#include "sohip/nn.hpp"
#include "test_support.hpp"

using namespace sohip;
using testsupport::rel_err;

namespace {

LinearLayer layer_from(std::initializer_list<std::initializer_list<double>> rows,
                       std::initializer_list<double> bias) {
  const std::size_t out_dim = rows.size();
  const std::size_t in_dim = rows.begin()->size();
  LinearLayer layer(in_dim, out_dim);
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (double v : row) layer.weight.at(r, c++) = v;
    ++r;
  }
  std::size_t i = 0;
  for (double v : bias) layer.bias[i++] = v;
  return layer;
}

}  // namespace

TEST_CASE("linear_forward identity") {
  const LinearLayer layer = layer_from({{1, 0}, {0, 1}}, {0, 0});
  const Vector y = linear_forward(layer, Vector{3.0, -1.0});
  CHECK(y[0] == 3.0);
  CHECK(y[1] == -1.0);
}

TEST_CASE("linear_forward zero weights return the bias") {
  const LinearLayer layer = layer_from({{0, 0, 0}, {0, 0, 0}}, {1, 2});
  const Vector y = linear_forward(layer, Vector{5.0, -2.0, 0.25});
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 2.0);
}

TEST_CASE("linear_forward rejects mismatched shapes naming both") {
  const LinearLayer layer = layer_from({{1, 0}, {0, 1}}, {0, 0});
  CHECK_THROWS_WITH_AS(linear_forward(layer, Vector{1.0, 2.0, 3.0}),
                       doctest::Contains("got 3"), std::invalid_argument);
}

TEST_CASE("linear layer gradients match central differences") {
  Rng rng = Rng::stream(5, 0, 0, StreamPurpose::kTest);
  LinearLayer layer = init_layer(rng, 2, 3);
  const Vector x{0.7, -1.2};
  // scalar loss: sum of outputs squared
  const auto loss_for = [&x](const LinearLayer& probe) {
    const Vector y = linear_forward(probe, x);
    double total = 0.0;
    for (std::size_t i = 0; i < y.dim(); ++i) total += y[i] * y[i];
    return total;
  };

  // analytic: dL/dy = 2y
  const Vector y = linear_forward(layer, x);
  Vector dy(y.dim());
  for (std::size_t i = 0; i < y.dim(); ++i) dy[i] = 2.0 * y[i];
  linear_backward(layer, x, dy);

  Vector theta;
  theta.data.insert(theta.data.end(), layer.weight.data.begin(), layer.weight.data.end());
  theta.data.insert(theta.data.end(), layer.bias.data.begin(), layer.bias.data.end());
  const auto f = [&](const Vector& probe) {
    LinearLayer probed = layer;
    std::size_t pos = 0;
    for (double& w : probed.weight.data) w = probe[pos++];
    for (double& b : probed.bias.data) b = probe[pos++];
    return loss_for(probed);
  };
  const Vector numeric = finite_diff_grad(f, theta, 1e-4);

  std::size_t pos = 0;
  for (double g : layer.weight_grad.data)
    CHECK(rel_err(g, numeric[pos++]) < 1e-4);
  for (double g : layer.bias_grad.data)
    CHECK(rel_err(g, numeric[pos++]) < 1e-4);
}

TEST_CASE("sigmoid fixed points and saturation") {
  const Vector y = sigmoid(Vector{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == 0.5);

  const Vector hi = sigmoid(Vector{40.0});
  CHECK(hi[0] < 1.0);  // strictly inside (0,1)
  CHECK(1.0 - hi[0] < 1e-12);

  const Vector lo = sigmoid(Vector{-800.0});
  CHECK(lo[0] > 0.0);
}

TEST_CASE("sigmoid derivative matches finite differences") {
  for (double x : {-2.0, 0.0, 3.0}) {
    const double s = sigmoid_scalar(x);
    const double analytic = s * (1.0 - s);
    const double eps = 1e-6;
    const double numeric =
        (sigmoid_scalar(x + eps) - sigmoid_scalar(x - eps)) / (2.0 * eps);
    CHECK(rel_err(analytic, numeric) < 1e-6);
  }
}

TEST_CASE("relu forward and backward") {
  const Vector y = relu_forward(Vector{-1.0, 0.0, 2.0});
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 2.0);

  const Vector all_neg = relu_forward(Vector{-3.0, -0.5});
  CHECK(all_neg[0] == 0.0);
  CHECK(all_neg[1] == 0.0);

  const Vector dx = relu_backward(Vector{-1.0, 0.0, 2.0}, Vector{5.0, 5.0, 5.0});
  CHECK(dx[0] == 0.0);
  CHECK(dx[1] == 0.0);  // gradient masked at exactly zero
  CHECK(dx[2] == 5.0);
}

TEST_CASE("relu gradient matches finite differences away from the kink") {
  Rng rng = Rng::stream(23, 0, 0, StreamPurpose::kTest);
  Vector x(6);
  for (auto& v : x.data) {
    v = rng.uniform(-2.0, 2.0);
    if (std::abs(v) < 0.05) v = 0.1;  // keep clear of the kink
  }
  const auto f = [](const Vector& probe) {
    const Vector y = relu_forward(probe);
    double total = 0.0;
    for (std::size_t i = 0; i < y.dim(); ++i) total += y[i] * y[i];
    return total;
  };
  const Vector y = relu_forward(x);
  Vector dy(y.dim());
  for (std::size_t i = 0; i < y.dim(); ++i) dy[i] = 2.0 * y[i];
  const Vector analytic = relu_backward(x, dy);
  const Vector numeric = finite_diff_grad(f, x, 1e-4);
  for (std::size_t i = 0; i < x.dim(); ++i)
    CHECK(rel_err(analytic[i], numeric[i]) < 1e-4);
}

TEST_CASE("uniform logits give loss ln K") {
  Matrix logits(2, 4);  // all zeros
  const XentResult res = softmax_cross_entropy(logits, {1, 3});
  CHECK(res.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("saturated true logit gives near-zero loss") {
  Matrix logits(1, 3);
  logits.at(0, 1) = 100.0;
  const XentResult res = softmax_cross_entropy(logits, {1});
  CHECK(res.loss < 1e-6);
}

TEST_CASE("cross entropy rejects out-of-range labels") {
  Matrix logits(1, 3);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {3}), std::invalid_argument);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {-1}), std::invalid_argument);
}

TEST_CASE("cross entropy gradient matches finite differences") {
  Rng rng = Rng::stream(29, 0, 0, StreamPurpose::kTest);
  Matrix logits(2, 3);
  for (double& v : logits.data) v = rng.uniform(-1.0, 1.0);
  const std::vector<int> labels{2, 0};

  const XentResult res = softmax_cross_entropy(logits, labels);

  Vector theta;
  theta.data = logits.data;
  const auto f = [&](const Vector& probe) {
    Matrix probed = logits;
    probed.data = probe.data;
    return softmax_cross_entropy(probed, labels).loss;
  };
  const Vector numeric = finite_diff_grad(f, theta, 1e-4);
  for (std::size_t i = 0; i < res.logits_grad.data.size(); ++i)
    CHECK(rel_err(res.logits_grad.data[i], numeric[i]) < 1e-4);
}

TEST_CASE("sgd step arithmetic") {
  LinearLayer layer(1, 1);
  layer.weight.at(0, 0) = 1.0;
  layer.weight_grad.at(0, 0) = 0.5;
  sgd_step(layer, 0.1, "p");
  CHECK(layer.weight.at(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(layer.weight_grad.at(0, 0) == 0.0);  // grads zeroed afterward
}

TEST_CASE("sgd with zero gradient leaves parameters unchanged") {
  LinearLayer layer(2, 2);
  layer.weight.at(0, 1) = 3.0;
  sgd_step(layer, 0.5, "p");
  CHECK(layer.weight.at(0, 1) == 3.0);
}

TEST_CASE("two sgd steps on f(p)=p^2 follow the closed form") {
  // gradient is 2p, so p <- p (1 - 2 lr) each step
  LinearLayer layer(1, 1);
  layer.weight.at(0, 0) = 1.0;
  for (int step = 0; step < 2; ++step) {
    layer.weight_grad.at(0, 0) = 2.0 * layer.weight.at(0, 0);
    sgd_step(layer, 0.01, "p");
  }
  CHECK(layer.weight.at(0, 0) == doctest::Approx(0.9604).epsilon(1e-12));
}

TEST_CASE("sgd aborts on non-finite gradients naming the parameter") {
  LinearLayer layer(2, 1);
  layer.weight_grad.at(0, 1) = std::nan("");
  CHECK_THROWS_WITH_AS(sgd_step(layer, 0.1, "encoder"),
                       doctest::Contains("encoder.weight"), std::runtime_error);
}

TEST_CASE("finite differences on a quadratic") {
  const auto f = [](const Vector& v) {
    double total = 0.0;
    for (double x : v.data) total += x * x;
    return total;
  };
  const Vector grad = finite_diff_grad(f, Vector{1.0, -2.0}, 1e-5);
  CHECK(std::abs(grad[0] - 2.0) < 1e-8);
  CHECK(std::abs(grad[1] + 4.0) < 1e-8);
}

TEST_CASE("finite differences of a constant vanish") {
  const auto f = [](const Vector&) { return 3.5; };
  const Vector grad = finite_diff_grad(f, Vector{0.3, 0.9, -1.0}, 1e-4);
  for (double g : grad.data) CHECK(g == 0.0);
}

TEST_CASE("init_layer determinism, zero bias, centered weights") {
  Rng a = Rng::stream(99, 1, 0, StreamPurpose::kModelInit);
  Rng b = Rng::stream(99, 1, 0, StreamPurpose::kModelInit);
  const LinearLayer la = init_layer(a, 4, 3);
  const LinearLayer lb = init_layer(b, 4, 3);
  CHECK(la.weight.data == lb.weight.data);

  for (double bias : la.bias.data) CHECK(bias == 0.0);

  // empirical mean of 10^4 draws within 3 sigma of zero
  Rng rng = Rng::stream(7, 0, 0, StreamPurpose::kModelInit);
  const std::size_t in_dim = 100;
  const LinearLayer big = init_layer(rng, in_dim, 100);
  double sum = 0.0;
  for (double w : big.weight.data) sum += w;
  const double n = static_cast<double>(big.weight.data.size());
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double sigma_mean = bound / std::sqrt(3.0 * n);
  CHECK(std::abs(sum / n) < 3.0 * sigma_mean);
  for (double w : big.weight.data) {
    CHECK(w >= -bound);
    CHECK(w <= bound);
  }
}

TEST_CASE("mlp forward/backward gradcheck") {
  Rng rng = Rng::stream(31, 0, 0, StreamPurpose::kTest);
  Mlp mlp;
  mlp.layers.push_back(init_layer(rng, 3, 4));
  mlp.layers.push_back(init_layer(rng, 4, 2));

  Matrix x(2, 3);
  for (double& v : x.data) v = rng.uniform(0.5, 1.5);  // keep ReLU strictly active

  const auto loss_for = [&x](Mlp probe) {
    const Matrix y = mlp_forward(probe, x, nullptr);
    double total = 0.0;
    for (double v : y.data) total += v * v;
    return total;
  };

  MlpCache cache;
  const Matrix y = mlp_forward(mlp, x, &cache);
  Matrix dy(y.rows, y.cols);
  for (std::size_t i = 0; i < y.data.size(); ++i) dy.data[i] = 2.0 * y.data[i];
  mlp_backward(mlp, cache, dy);

  Vector theta;
  for (const auto& layer : mlp.layers) {
    theta.data.insert(theta.data.end(), layer.weight.data.begin(), layer.weight.data.end());
    theta.data.insert(theta.data.end(), layer.bias.data.begin(), layer.bias.data.end());
  }
  const auto f = [&](const Vector& probe) {
    Mlp probed = mlp;
    std::size_t pos = 0;
    for (auto& layer : probed.layers) {
      for (double& w : layer.weight.data) w = probe[pos++];
      for (double& b : layer.bias.data) b = probe[pos++];
    }
    return loss_for(probed);
  };
  const Vector numeric = finite_diff_grad(f, theta, 1e-4);
  std::size_t pos = 0;
  for (const auto& layer : mlp.layers) {
    for (double g : layer.weight_grad.data)
      CHECK(rel_err(g, numeric[pos++]) < 1e-4);
    for (double g : layer.bias_grad.data)
      CHECK(rel_err(g, numeric[pos++]) < 1e-4);
  }
}
