#include "sohip/memory.hpp"

#include <stdexcept>

namespace sohip {

namespace {

// d(sigmoid pre-activation) from d(gate output)
Vector sigmoid_input_grad(const Vector& gate, const Vector& d_gate) {
  Vector d_pre(gate.dim());
  for (std::size_t i = 0; i < gate.dim(); ++i)
    d_pre[i] = d_gate[i] * gate[i] * (1.0 - gate[i]);
  return d_pre;
}

}  // namespace

GateBank init_gate_bank(Rng& rng, std::size_t mem_dim) {
  GateBank bank;
  bank.g_short = init_layer(rng, mem_dim, mem_dim);
  bank.g_in = init_layer(rng, 2 * mem_dim, mem_dim);
  bank.g_f = init_layer(rng, 2 * mem_dim, mem_dim);
  bank.g_o = init_layer(rng, 2 * mem_dim, mem_dim);
  bank.g_fuse = init_layer(rng, 2 * mem_dim, mem_dim);
  return bank;
}

ShortTermResult abstract_short_term(const LinearLayer& encoder,
                                    const GateBank& gates, const Matrix& z,
                                    bool use_importance_gate) {
  if (z.rows < 1)
    throw std::invalid_argument("abstract_short_term: empty batch");
  if (z.cols != encoder.in_dim())
    throw_shape_error("abstract_short_term", z.cols, encoder.in_dim());

  ShortTermResult result;
  result.cache.z = z;
  result.cache.z_enc = linear_forward(encoder, z);
  const std::size_t mem_dim = encoder.out_dim();

  Vector mean(mem_dim);
  for (std::size_t b = 0; b < z.rows; ++b) {
    const double* row = result.cache.z_enc.row(b);
    for (std::size_t j = 0; j < mem_dim; ++j) mean[j] += row[j];
  }
  scale_inplace(mean, 1.0 / static_cast<double>(z.rows));
  result.cache.z_mean = mean;
  result.cache.gated = use_importance_gate;

  if (use_importance_gate) {
    result.cache.gate = sigmoid(linear_forward(gates.g_short, mean));
    result.memory = hadamard(result.cache.gate, mean);
  } else {
    result.memory = mean;
  }
  return result;
}

Matrix abstract_short_term_backward(LinearLayer& encoder, GateBank& gates,
                                    const ShortTermCache& cache,
                                    const Vector& d_memory) {
  if (cache.z_enc.rows == 0)
    throw std::logic_error("abstract_short_term_backward: missing forward cache");

  Vector d_mean(cache.z_mean.dim());
  if (cache.gated) {
    const Vector d_gate = hadamard(d_memory, cache.z_mean);
    d_mean = hadamard(d_memory, cache.gate);
    const Vector d_pre = sigmoid_input_grad(cache.gate, d_gate);
    add_inplace(d_mean, linear_backward(gates.g_short, cache.z_mean, d_pre));
  } else {
    d_mean = d_memory;
  }

  const double inv_batch = 1.0 / static_cast<double>(cache.z.rows);
  Matrix d_enc(cache.z.rows, d_mean.dim());
  for (std::size_t b = 0; b < d_enc.rows; ++b) {
    double* row = d_enc.row(b);
    for (std::size_t j = 0; j < d_mean.dim(); ++j) row[j] = d_mean[j] * inv_batch;
  }
  return linear_backward(encoder, cache.z, d_enc);
}

ConsolidateResult consolidate(const GateBank& gates, const Vector& short_term,
                              const Vector& long_term_prev) {
  const std::size_t mem_dim = gates.mem_dim();
  if (short_term.dim() != mem_dim)
    throw_shape_error("consolidate", short_term.dim(), mem_dim);
  if (long_term_prev.dim() != mem_dim)
    throw_shape_error("consolidate", long_term_prev.dim(), mem_dim);

  ConsolidateResult result;
  auto& cache = result.cache;
  cache.short_term = short_term;
  cache.long_term_prev = long_term_prev;
  cache.joint = concat(short_term, long_term_prev);
  cache.gate_in = sigmoid(linear_forward(gates.g_in, cache.joint));
  cache.gate_f = sigmoid(linear_forward(gates.g_f, cache.joint));
  cache.gate_o = sigmoid(linear_forward(gates.g_o, cache.joint));

  result.memory = Vector(mem_dim);
  for (std::size_t j = 0; j < mem_dim; ++j)
    result.memory[j] = cache.gate_o[j] * (cache.gate_in[j] * short_term[j] +
                                          cache.gate_f[j] * long_term_prev[j]);
  return result;
}

Vector consolidate_backward(GateBank& gates, const ConsolidateCache& cache,
                            const Vector& d_memory) {
  if (cache.joint.dim() == 0)
    throw std::logic_error("consolidate_backward: missing forward cache");
  const std::size_t mem_dim = cache.short_term.dim();

  Vector inner(mem_dim), d_inner(mem_dim);
  for (std::size_t j = 0; j < mem_dim; ++j) {
    inner[j] = cache.gate_in[j] * cache.short_term[j] +
               cache.gate_f[j] * cache.long_term_prev[j];
    d_inner[j] = d_memory[j] * cache.gate_o[j];
  }
  const Vector d_gate_o = hadamard(d_memory, inner);
  const Vector d_gate_in = hadamard(d_inner, cache.short_term);
  const Vector d_gate_f = hadamard(d_inner, cache.long_term_prev);
  Vector d_short = hadamard(d_inner, cache.gate_in);

  Vector d_joint(2 * mem_dim);
  add_inplace(d_joint, linear_backward(gates.g_in, cache.joint,
                                       sigmoid_input_grad(cache.gate_in, d_gate_in)));
  add_inplace(d_joint, linear_backward(gates.g_f, cache.joint,
                                       sigmoid_input_grad(cache.gate_f, d_gate_f)));
  add_inplace(d_joint, linear_backward(gates.g_o, cache.joint,
                                       sigmoid_input_grad(cache.gate_o, d_gate_o)));
  // the long_term_prev half of d_joint is dropped: carried memory is state
  add_inplace(d_short, head(d_joint, mem_dim));
  return d_short;
}

FuseResult fuse_and_enhance(const GateBank& gates, const LinearLayer& decoder,
                            const Vector& long_term, const Vector& collective,
                            const Matrix& z, bool use_collective) {
  const std::size_t mem_dim = decoder.in_dim();
  if (long_term.dim() != mem_dim)
    throw_shape_error("fuse_and_enhance", long_term.dim(), mem_dim);
  if (use_collective && collective.dim() != mem_dim)
    throw_shape_error("fuse_and_enhance", collective.dim(), mem_dim);
  if (z.cols != decoder.out_dim())
    throw_shape_error("fuse_and_enhance", z.cols, decoder.out_dim());

  FuseResult result;
  auto& cache = result.cache;
  cache.long_term = long_term;
  cache.used_collective = use_collective;

  if (use_collective) {
    cache.collective = collective;
    cache.joint = concat(long_term, collective);
    cache.gate = sigmoid(linear_forward(gates.g_fuse, cache.joint));
    cache.complete = Vector(mem_dim);
    for (std::size_t j = 0; j < mem_dim; ++j)
      cache.complete[j] = cache.gate[j] * collective[j] + long_term[j];
  } else {
    cache.complete = long_term;
  }
  result.complete = cache.complete;

  const Vector decoded = linear_forward(decoder, cache.complete);
  result.enhanced = Matrix(z.rows, z.cols);
  for (std::size_t b = 0; b < z.rows; ++b) {
    const double* src = z.row(b);
    double* dst = result.enhanced.row(b);
    for (std::size_t j = 0; j < z.cols; ++j) dst[j] = src[j] + decoded[j];
  }
  return result;
}

Vector fuse_and_enhance_backward(LinearLayer& decoder, GateBank& gates,
                                 const FuseCache& cache,
                                 const Matrix& d_enhanced) {
  if (cache.complete.dim() == 0)
    throw std::logic_error("fuse_and_enhance_backward: missing forward cache");

  // Expand broadcast the decoded memory to every row, so its gradient is
  // the row sum.
  Vector d_decoded(d_enhanced.cols);
  for (std::size_t b = 0; b < d_enhanced.rows; ++b) {
    const double* row = d_enhanced.row(b);
    for (std::size_t j = 0; j < d_enhanced.cols; ++j) d_decoded[j] += row[j];
  }
  const Vector d_complete = linear_backward(decoder, cache.complete, d_decoded);

  if (!cache.used_collective) return d_complete;

  Vector d_long = d_complete;
  const Vector d_gate = hadamard(d_complete, cache.collective);
  const Vector d_pre = sigmoid_input_grad(cache.gate, d_gate);
  const Vector d_joint = linear_backward(gates.g_fuse, cache.joint, d_pre);
  // collective half is constant (server state); only the long half flows
  add_inplace(d_long, head(d_joint, cache.long_term.dim()));
  return d_long;
}

}  // namespace sohip
