#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sohip/rng.hpp"
#include "sohip/tensor.hpp"

namespace sohip {

// Fully connected layer, y = W x + b. Gradients accumulate into
// weight_grad / bias_grad until the next optimizer step zeroes them.
struct LinearLayer {
  Matrix weight;       // out_dim x in_dim
  Vector bias;         // out_dim
  Matrix weight_grad;  // same shape as weight
  Vector bias_grad;    // same shape as bias

  LinearLayer() = default;
  LinearLayer(std::size_t in_dim, std::size_t out_dim)
      : weight(out_dim, in_dim),
        bias(out_dim),
        weight_grad(out_dim, in_dim),
        bias_grad(out_dim) {}

  std::size_t in_dim() const { return weight.cols; }
  std::size_t out_dim() const { return weight.rows; }
};

// Weights uniform in [-1/sqrt(in_dim), +1/sqrt(in_dim)], bias zero.
LinearLayer init_layer(Rng& rng, std::size_t in_dim, std::size_t out_dim);

Vector linear_forward(const LinearLayer& layer, const Vector& x);
// Batched: x is B x in_dim, result B x out_dim, bias broadcast per row.
Matrix linear_forward(const LinearLayer& layer, const Matrix& x);

// Accumulates parameter gradients given the forward input and returns the
// gradient with respect to that input.
Vector linear_backward(LinearLayer& layer, const Vector& x, const Vector& dy);
Matrix linear_backward(LinearLayer& layer, const Matrix& x, const Matrix& dy);

double sigmoid_scalar(double x);
// Outputs clamped into the open interval (0, 1) so gates never saturate to
// an exact bound; sigmoid(0) == 0.5 exactly.
Vector sigmoid(const Vector& x);

Vector relu_forward(const Vector& x);
Matrix relu_forward(const Matrix& x);
// Masks the incoming gradient wherever the forward input was <= 0.
Vector relu_backward(const Vector& x, const Vector& dy);
Matrix relu_backward(const Matrix& x, const Matrix& dy);

struct XentResult {
  double loss = 0.0;
  Matrix logits_grad;  // (softmax - one_hot) / batch
};

// Mean negative log-likelihood over the batch, max-subtraction stabilized.
XentResult softmax_cross_entropy(const Matrix& logits,
                                 const std::vector<int>& labels);

// p <- p - lr * g for every parameter, then grads are zeroed. A non-finite
// gradient aborts with a diagnostic naming the offending parameter.
void sgd_step(LinearLayer& layer, double lr, const std::string& name);

// Central differences (f(x+eps e_j) - f(x-eps e_j)) / (2 eps).
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& theta, double eps);

// Multi-layer perceptron: linear layers with ReLU between them, linear output.
struct Mlp {
  std::vector<LinearLayer> layers;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
};

struct MlpCache {
  std::vector<Matrix> inputs;  // input to each layer
};

// cache may be null for a pure forward pass (evaluation).
Matrix mlp_forward(const Mlp& mlp, const Matrix& x, MlpCache* cache);
Matrix mlp_backward(Mlp& mlp, const MlpCache& cache, const Matrix& dy);

}  // namespace sohip
