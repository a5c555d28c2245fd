#include <doctest.h>

#include <cmath>

#include "sohip/memory.hpp"
#include "test_support.hpp"

using namespace sohip;
using testsupport::rel_err;

namespace {

Vector flatten_layers(const std::vector<const LinearLayer*>& layers) {
  Vector theta;
  for (const auto* layer : layers) {
    theta.data.insert(theta.data.end(), layer->weight.data.begin(),
                      layer->weight.data.end());
    theta.data.insert(theta.data.end(), layer->bias.data.begin(),
                      layer->bias.data.end());
  }
  return theta;
}

void unflatten_layers(const std::vector<LinearLayer*>& layers, const Vector& theta) {
  std::size_t pos = 0;
  for (auto* layer : layers) {
    for (double& w : layer->weight.data) w = theta[pos++];
    for (double& b : layer->bias.data) b = theta[pos++];
  }
}

Vector collect_grads(const std::vector<const LinearLayer*>& layers) {
  Vector grads;
  for (const auto* layer : layers) {
    grads.data.insert(grads.data.end(), layer->weight_grad.data.begin(),
                      layer->weight_grad.data.end());
    grads.data.insert(grads.data.end(), layer->bias_grad.data.begin(),
                      layer->bias_grad.data.end());
  }
  return grads;
}

void zero_layer(LinearLayer& layer) {
  std::fill(layer.weight.data.begin(), layer.weight.data.end(), 0.0);
  std::fill(layer.bias.data.begin(), layer.bias.data.end(), 0.0);
}

struct Fixture {
  LinearLayer encoder;
  LinearLayer decoder;
  GateBank gates;
  Matrix z;
  Vector long_prev;
  Vector collective;

  Fixture(std::size_t batch = 3, std::size_t feat = 4, std::size_t mem = 2,
          std::uint64_t seed = 5) {
    Rng rng = Rng::stream(seed, 0, 0, StreamPurpose::kTest);
    encoder = init_layer(rng, feat, mem);
    decoder = init_layer(rng, mem, feat);
    gates = init_gate_bank(rng, mem);
    z = Matrix(batch, feat);
    for (double& v : z.data) v = rng.uniform(-1.0, 1.0);
    long_prev = Vector(mem);
    collective = Vector(mem);
    for (auto& v : long_prev.data) v = rng.uniform(-1.0, 1.0);
    for (auto& v : collective.data) v = rng.uniform(-1.0, 1.0);
  }
};

}  // namespace

TEST_CASE("batch of identical rows abstracts to that row's encoding") {
  Fixture fx;
  Matrix z(4, fx.z.cols);
  for (std::size_t b = 0; b < z.rows; ++b)
    for (std::size_t c = 0; c < z.cols; ++c) z.at(b, c) = fx.z.at(0, c);

  const auto res = abstract_short_term(fx.encoder, fx.gates, z);
  Vector row(fx.z.cols);
  for (std::size_t c = 0; c < z.cols; ++c) row[c] = fx.z.at(0, c);
  const Vector enc = linear_forward(fx.encoder, row);
  for (std::size_t j = 0; j < enc.dim(); ++j)
    CHECK(res.cache.z_mean[j] == doctest::Approx(enc[j]).epsilon(1e-14));
}

TEST_CASE("zeroed importance gate halves the batch mean") {
  Fixture fx;
  zero_layer(fx.gates.g_short);
  const auto res = abstract_short_term(fx.encoder, fx.gates, fx.z);
  for (std::size_t j = 0; j < res.memory.dim(); ++j) {
    CHECK(res.cache.gate[j] == 0.5);
    CHECK(res.memory[j] == 0.5 * res.cache.z_mean[j]);
  }
}

TEST_CASE("bypassed importance gate returns the raw batch mean") {
  Fixture fx;
  const auto res = abstract_short_term(fx.encoder, fx.gates, fx.z,
                                       /*use_importance_gate=*/false);
  CHECK(res.memory.data == res.cache.z_mean.data);
}

TEST_CASE("short-term abstraction gradients match finite differences") {
  Fixture fx;
  const auto loss_of = [&fx](const LinearLayer& enc, const GateBank& gates) {
    const auto res = abstract_short_term(enc, gates, fx.z);
    double total = 0.0;
    for (double v : res.memory.data) total += v * v;
    return total;
  };

  auto res = abstract_short_term(fx.encoder, fx.gates, fx.z);
  Vector d_memory(res.memory.dim());
  for (std::size_t j = 0; j < d_memory.dim(); ++j)
    d_memory[j] = 2.0 * res.memory[j];
  LinearLayer encoder = fx.encoder;
  GateBank gates = fx.gates;
  abstract_short_term_backward(encoder, gates, res.cache, d_memory);

  const Vector theta = flatten_layers({&fx.encoder, &fx.gates.g_short});
  const auto f = [&](const Vector& probe) {
    LinearLayer enc = fx.encoder;
    GateBank bank = fx.gates;
    unflatten_layers({&enc, &bank.g_short}, probe);
    return loss_of(enc, bank);
  };
  const Vector numeric = finite_diff_grad(f, theta, 1e-4);
  const Vector analytic = collect_grads({&encoder, &gates.g_short});
  for (std::size_t i = 0; i < analytic.dim(); ++i)
    CHECK(rel_err(analytic[i], numeric[i]) < 1e-3);
}

TEST_CASE("zeroed consolidation gates quarter the memory sum") {
  Fixture fx;
  zero_layer(fx.gates.g_in);
  zero_layer(fx.gates.g_f);
  zero_layer(fx.gates.g_o);
  Vector short_term{0.8, -0.4};
  const auto res = consolidate(fx.gates, short_term, fx.long_prev);
  for (std::size_t j = 0; j < res.memory.dim(); ++j)
    CHECK(res.memory[j] ==
          doctest::Approx(0.25 * (short_term[j] + fx.long_prev[j])).epsilon(1e-15));
}

TEST_CASE("saturated gates reach the perfect-retention limit") {
  Fixture fx;
  zero_layer(fx.gates.g_in);
  zero_layer(fx.gates.g_f);
  zero_layer(fx.gates.g_o);
  for (auto& b : fx.gates.g_in.bias.data) b = -40.0;
  for (auto& b : fx.gates.g_f.bias.data) b = 40.0;
  for (auto& b : fx.gates.g_o.bias.data) b = 40.0;
  Vector short_term{0.8, -0.4};
  const auto res = consolidate(fx.gates, short_term, fx.long_prev);
  for (std::size_t j = 0; j < res.memory.dim(); ++j)
    CHECK(std::abs(res.memory[j] - fx.long_prev[j]) < 1e-10);
}

TEST_CASE("consolidation of zero memories is exactly zero") {
  Fixture fx;
  const Vector zero(2);
  const auto res = consolidate(fx.gates, zero, zero);
  for (double v : res.memory.data) CHECK(v == 0.0);
}

TEST_CASE("consolidation gradients match finite differences") {
  Fixture fx;
  Vector short_term{0.8, -0.4};

  const auto loss_of = [&](const GateBank& gates, const Vector& s) {
    const auto res = consolidate(gates, s, fx.long_prev);
    double total = 0.0;
    for (double v : res.memory.data) total += v * v;
    return total;
  };

  auto res = consolidate(fx.gates, short_term, fx.long_prev);
  Vector d_memory(res.memory.dim());
  for (std::size_t j = 0; j < d_memory.dim(); ++j)
    d_memory[j] = 2.0 * res.memory[j];
  GateBank gates = fx.gates;
  const Vector d_short = consolidate_backward(gates, res.cache, d_memory);

  // parameter gradients
  const Vector theta =
      flatten_layers({&fx.gates.g_in, &fx.gates.g_f, &fx.gates.g_o});
  const auto f_params = [&](const Vector& probe) {
    GateBank bank = fx.gates;
    unflatten_layers({&bank.g_in, &bank.g_f, &bank.g_o}, probe);
    return loss_of(bank, short_term);
  };
  const Vector numeric = finite_diff_grad(f_params, theta, 1e-4);
  const Vector analytic =
      collect_grads({&gates.g_in, &gates.g_f, &gates.g_o});
  for (std::size_t i = 0; i < analytic.dim(); ++i)
    CHECK(rel_err(analytic[i], numeric[i]) < 1e-3);

  // gradient flowing into the short-term memory
  const auto f_short = [&](const Vector& probe) {
    return loss_of(fx.gates, probe);
  };
  const Vector numeric_short = finite_diff_grad(f_short, short_term, 1e-4);
  for (std::size_t j = 0; j < d_short.dim(); ++j)
    CHECK(rel_err(d_short[j], numeric_short[j]) < 1e-3);
}

TEST_CASE("zero collective leaves the complete memory bit-identical") {
  Fixture fx;
  const Vector zero(2);
  const auto res = fuse_and_enhance(fx.gates, fx.decoder, fx.long_prev, zero, fx.z);
  CHECK(res.complete.data == fx.long_prev.data);
}

TEST_CASE("zero decoder keeps the residual an identity") {
  Fixture fx;
  zero_layer(fx.decoder);
  const auto res =
      fuse_and_enhance(fx.gates, fx.decoder, fx.long_prev, fx.collective, fx.z);
  CHECK(res.enhanced.data == fx.z.data);
}

TEST_CASE("bypassed fusion ignores the collective entirely") {
  Fixture fx;
  const auto with = fuse_and_enhance(fx.gates, fx.decoder, fx.long_prev,
                                     fx.collective, fx.z, /*use_collective=*/false);
  CHECK(with.complete.data == fx.long_prev.data);
}

TEST_CASE("fusion gradients match finite differences") {
  Fixture fx;
  const auto loss_of = [&](const GateBank& gates, const LinearLayer& dec,
                           const Vector& long_term) {
    const auto res =
        fuse_and_enhance(gates, dec, long_term, fx.collective, fx.z);
    double total = 0.0;
    for (double v : res.enhanced.data) total += v * v;
    return total;
  };

  auto res =
      fuse_and_enhance(fx.gates, fx.decoder, fx.long_prev, fx.collective, fx.z);
  Matrix d_enhanced(res.enhanced.rows, res.enhanced.cols);
  for (std::size_t i = 0; i < d_enhanced.data.size(); ++i)
    d_enhanced.data[i] = 2.0 * res.enhanced.data[i];
  GateBank gates = fx.gates;
  LinearLayer decoder = fx.decoder;
  const Vector d_long =
      fuse_and_enhance_backward(decoder, gates, res.cache, d_enhanced);

  const Vector theta = flatten_layers({&fx.decoder, &fx.gates.g_fuse});
  const auto f_params = [&](const Vector& probe) {
    GateBank bank = fx.gates;
    LinearLayer dec = fx.decoder;
    unflatten_layers({&dec, &bank.g_fuse}, probe);
    return loss_of(bank, dec, fx.long_prev);
  };
  const Vector numeric = finite_diff_grad(f_params, theta, 1e-4);
  const Vector analytic = collect_grads({&decoder, &gates.g_fuse});
  for (std::size_t i = 0; i < analytic.dim(); ++i)
    CHECK(rel_err(analytic[i], numeric[i]) < 1e-3);

  const auto f_long = [&](const Vector& probe) {
    return loss_of(fx.gates, fx.decoder, probe);
  };
  const Vector numeric_long = finite_diff_grad(f_long, fx.long_prev, 1e-4);
  for (std::size_t j = 0; j < d_long.dim(); ++j)
    CHECK(rel_err(d_long[j], numeric_long[j]) < 1e-3);
}

TEST_CASE("gate outputs stay strictly inside the unit interval") {
  Fixture fx;
  for (auto& b : fx.gates.g_in.bias.data) b = 500.0;
  for (auto& b : fx.gates.g_f.bias.data) b = -500.0;
  Vector big{900.0, -900.0};
  const auto res = consolidate(fx.gates, big, fx.long_prev);
  for (const Vector* gate :
       {&res.cache.gate_in, &res.cache.gate_f, &res.cache.gate_o}) {
    for (double v : gate->data) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Fixture fx;
  Matrix wrong(2, 7);
  CHECK_THROWS_AS(abstract_short_term(fx.encoder, fx.gates, wrong),
                  std::invalid_argument);
  CHECK_THROWS_AS(consolidate(fx.gates, Vector(3), fx.long_prev),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      fuse_and_enhance(fx.gates, fx.decoder, Vector(3), fx.collective, fx.z),
      std::invalid_argument);
}
