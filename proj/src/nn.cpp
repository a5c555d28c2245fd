#include "sohip/nn.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sohip {

LinearLayer init_layer(Rng& rng, std::size_t in_dim, std::size_t out_dim) {
  if (in_dim < 1 || out_dim < 1)
    throw std::invalid_argument("init_layer: dims must be >= 1");
  LinearLayer layer(in_dim, out_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
  return layer;
}

Vector linear_forward(const LinearLayer& layer, const Vector& x) {
  if (x.dim() != layer.in_dim())
    throw_shape_error("linear_forward", x.dim(), layer.in_dim());
  Vector y(layer.out_dim());
  for (std::size_t o = 0; o < layer.out_dim(); ++o) {
    const double* w = layer.weight.row(o);
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in_dim(); ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
  return y;
}

Matrix linear_forward(const LinearLayer& layer, const Matrix& x) {
  if (x.cols != layer.in_dim())
    throw_shape_error("linear_forward", x.cols, layer.in_dim());
  Matrix y(x.rows, layer.out_dim());
  for (std::size_t b = 0; b < x.rows; ++b) {
    const double* xb = x.row(b);
    double* yb = y.row(b);
    for (std::size_t o = 0; o < layer.out_dim(); ++o) {
      const double* w = layer.weight.row(o);
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < layer.in_dim(); ++i) acc += w[i] * xb[i];
      yb[o] = acc;
    }
  }
  return y;
}

Vector linear_backward(LinearLayer& layer, const Vector& x, const Vector& dy) {
  if (x.dim() != layer.in_dim())
    throw_shape_error("linear_backward", x.dim(), layer.in_dim());
  if (dy.dim() != layer.out_dim())
    throw_shape_error("linear_backward", dy.dim(), layer.out_dim());
  Vector dx(layer.in_dim());
  for (std::size_t o = 0; o < layer.out_dim(); ++o) {
    const double g = dy[o];
    layer.bias_grad[o] += g;
    double* wg = layer.weight_grad.row(o);
    const double* w = layer.weight.row(o);
    for (std::size_t i = 0; i < layer.in_dim(); ++i) {
      wg[i] += g * x[i];
      dx[i] += g * w[i];
    }
  }
  return dx;
}

Matrix linear_backward(LinearLayer& layer, const Matrix& x, const Matrix& dy) {
  if (x.cols != layer.in_dim())
    throw_shape_error("linear_backward", x.cols, layer.in_dim());
  if (dy.cols != layer.out_dim() || dy.rows != x.rows)
    throw_shape_error("linear_backward", dy.cols, layer.out_dim());
  Matrix dx(x.rows, layer.in_dim());
  for (std::size_t b = 0; b < x.rows; ++b) {
    const double* xb = x.row(b);
    const double* gb = dy.row(b);
    double* dxb = dx.row(b);
    for (std::size_t o = 0; o < layer.out_dim(); ++o) {
      const double g = gb[o];
      layer.bias_grad[o] += g;
      double* wg = layer.weight_grad.row(o);
      const double* w = layer.weight.row(o);
      for (std::size_t i = 0; i < layer.in_dim(); ++i) {
        wg[i] += g * xb[i];
        dxb[i] += g * w[i];
      }
    }
  }
  return dx;
}

double sigmoid_scalar(double x) {
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  if (y < lo) y = lo;
  if (y > hi) y = hi;
  return y;
}

Vector sigmoid(const Vector& x) {
  Vector y(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) y[i] = sigmoid_scalar(x[i]);
  return y;
}

Vector relu_forward(const Vector& x) {
  Vector y(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Matrix relu_forward(const Matrix& x) {
  Matrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  return y;
}

Vector relu_backward(const Vector& x, const Vector& dy) {
  if (x.dim() != dy.dim()) throw_shape_error("relu_backward", dy.dim(), x.dim());
  Vector dx(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i)
    dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

Matrix relu_backward(const Matrix& x, const Matrix& dy) {
  if (x.rows != dy.rows || x.cols != dy.cols)
    throw_shape_error("relu_backward", dy.cols, x.cols);
  Matrix dx(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    dx.data[i] = x.data[i] > 0.0 ? dy.data[i] : 0.0;
  return dx;
}

XentResult softmax_cross_entropy(const Matrix& logits,
                                 const std::vector<int>& labels) {
  if (labels.size() != logits.rows)
    throw_shape_error("softmax_cross_entropy", labels.size(), logits.rows);
  const std::size_t batch = logits.rows;
  const std::size_t classes = logits.cols;
  XentResult result;
  result.logits_grad = Matrix(batch, classes);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      std::ostringstream msg;
      msg << "softmax_cross_entropy: label " << label << " out of range [0, "
          << classes << ") at row " << b;
      throw std::invalid_argument(msg.str());
    }
    const double* row = logits.row(b);
    double maxv = row[0];
    for (std::size_t k = 1; k < classes; ++k) maxv = std::max(maxv, row[k]);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(row[k] - maxv);
    const double log_denom = std::log(denom);
    loss += log_denom - (row[static_cast<std::size_t>(label)] - maxv);
    double* grad = result.logits_grad.row(b);
    for (std::size_t k = 0; k < classes; ++k)
      grad[k] = std::exp(row[k] - maxv) / denom / static_cast<double>(batch);
    grad[static_cast<std::size_t>(label)] -= 1.0 / static_cast<double>(batch);
  }
  result.loss = loss / static_cast<double>(batch);
  return result;
}

void sgd_step(LinearLayer& layer, double lr, const std::string& name) {
  for (std::size_t i = 0; i < layer.weight.data.size(); ++i) {
    const double g = layer.weight_grad.data[i];
    if (!std::isfinite(g)) {
      std::ostringstream msg;
      msg << "sgd_step: non-finite gradient in " << name << ".weight["
          << i / layer.weight.cols << "," << i % layer.weight.cols << "]";
      throw std::runtime_error(msg.str());
    }
    layer.weight.data[i] -= lr * g;
    layer.weight_grad.data[i] = 0.0;
  }
  for (std::size_t i = 0; i < layer.bias.dim(); ++i) {
    const double g = layer.bias_grad[i];
    if (!std::isfinite(g)) {
      std::ostringstream msg;
      msg << "sgd_step: non-finite gradient in " << name << ".bias[" << i << "]";
      throw std::runtime_error(msg.str());
    }
    layer.bias[i] -= lr * g;
    layer.bias_grad[i] = 0.0;
  }
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& theta, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be > 0");
  Vector grad(theta.dim());
  Vector probe = theta;
  for (std::size_t j = 0; j < theta.dim(); ++j) {
    const double saved = probe[j];
    probe[j] = saved + eps;
    const double hi = f(probe);
    probe[j] = saved - eps;
    const double lo = f(probe);
    probe[j] = saved;
    grad[j] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

Matrix mlp_forward(const Mlp& mlp, const Matrix& x, MlpCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->inputs.reserve(mlp.layers.size());
  }
  Matrix cur = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    if (cache) cache->inputs.push_back(cur);
    cur = linear_forward(mlp.layers[l], cur);
    if (l + 1 < mlp.layers.size()) cur = relu_forward(cur);
  }
  return cur;
}

Matrix mlp_backward(Mlp& mlp, const MlpCache& cache, const Matrix& dy) {
  if (cache.inputs.size() != mlp.layers.size())
    throw std::logic_error("mlp_backward: stale or missing forward cache");
  Matrix grad = dy;
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    if (l + 1 < mlp.layers.size()) {
      // inputs[l+1] is the ReLU output; its positivity mask equals the
      // pre-activation's, so it serves as the backward mask directly
      grad = relu_backward(cache.inputs[l + 1], grad);
    }
    grad = linear_backward(mlp.layers[l], cache.inputs[l], grad);
  }
  return grad;
}

}  // namespace sohip
