#include "sohip/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sohip {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoShortGate: return "a";
    case Variant::kNoConsolidation: return "b";
    case Variant::kNoCollectiveFusion: return "c";
    case Variant::kNoMemory: return "d";
  }
  return "full";
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "a") return Variant::kNoShortGate;
  if (name == "b") return Variant::kNoConsolidation;
  if (name == "c") return Variant::kNoCollectiveFusion;
  if (name == "d") return Variant::kNoMemory;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected full|a|b|c|d)");
}

AgentModel make_agent_model(std::uint64_t seed, std::uint32_t agent_id,
                            std::size_t input_dim, std::size_t feature_dim,
                            std::size_t hidden_layers, std::size_t num_classes,
                            std::size_t mem_dim) {
  if (mem_dim > feature_dim)
    throw std::invalid_argument("make_agent_model: mem_dim must be <= feature_dim");
  if (hidden_layers < 1 || hidden_layers > 2)
    throw std::invalid_argument("make_agent_model: hidden_layers must be 1 or 2");

  Rng rng = Rng::stream(seed, agent_id, 0, StreamPurpose::kModelInit);
  AgentModel model;
  model.id = agent_id;
  model.input_dim = input_dim;
  model.feature_dim = feature_dim;
  model.num_classes = num_classes;
  model.mem_dim = mem_dim;

  model.extractor.layers.push_back(init_layer(rng, input_dim, feature_dim));
  for (std::size_t h = 1; h < hidden_layers; ++h)
    model.extractor.layers.push_back(init_layer(rng, feature_dim, feature_dim));
  model.extractor.layers.push_back(init_layer(rng, feature_dim, feature_dim));

  model.classifier = init_layer(rng, feature_dim, num_classes);
  model.encoder = init_layer(rng, feature_dim, mem_dim);
  // zero-init: the memory residual starts as an exact no-op and only
  // contributes once the decoder has learned something
  model.decoder = LinearLayer(mem_dim, feature_dim);
  model.gates = init_gate_bank(rng, mem_dim);
  model.memory = MemoryState(mem_dim);
  return model;
}

void for_each_layer(AgentModel& model,
                    const std::function<void(LinearLayer&, const std::string&)>& fn) {
  for (std::size_t l = 0; l < model.extractor.layers.size(); ++l)
    fn(model.extractor.layers[l], "extractor." + std::to_string(l));
  fn(model.classifier, "classifier");
  fn(model.encoder, "encoder");
  fn(model.decoder, "decoder");
  fn(model.gates.g_short, "gates.short");
  fn(model.gates.g_in, "gates.in");
  fn(model.gates.g_f, "gates.f");
  fn(model.gates.g_o, "gates.o");
  fn(model.gates.g_fuse, "gates.fuse");
}

void for_each_layer(const AgentModel& model,
                    const std::function<void(const LinearLayer&, const std::string&)>& fn) {
  for_each_layer(const_cast<AgentModel&>(model),
                 [&fn](LinearLayer& layer, const std::string& name) {
                   fn(layer, name);
                 });
}

namespace {

Matrix gather_batch(const Dataset& ds, const std::vector<std::size_t>& order,
                    std::size_t begin, std::size_t end,
                    std::vector<int>* labels) {
  Matrix batch(end - begin, ds.feature_dim());
  labels->clear();
  labels->reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const double* src = ds.features.row(order[i]);
    std::copy(src, src + ds.feature_dim(), batch.row(i - begin));
    labels->push_back(ds.labels[order[i]]);
  }
  return batch;
}

}  // namespace

LocalRoundResult local_round(AgentModel& model, const AgentShard& shard,
                             const CollectiveMemory& collective,
                             const LocalTrainConfig& cfg, std::uint64_t seed,
                             std::uint32_t round) {
  if (shard.train.size() == 0)
    throw std::runtime_error("local_round: agent " + std::to_string(model.id) +
                             " has an empty training shard");
  const Variant variant = cfg.variant;
  const bool use_memory = variant != Variant::kNoMemory;
  if (use_memory && collective.vec.dim() != model.mem_dim)
    throw_shape_error("local_round", collective.vec.dim(), model.mem_dim);

  Rng shuffle_rng = Rng::stream(seed, model.id, round, StreamPurpose::kShuffle);
  std::vector<std::size_t> order(shard.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double loss_sum = 0.0;
  std::size_t batches = 0;
  std::vector<int> labels;

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      const Matrix batch = gather_batch(shard.train, order, begin, end, &labels);

      MlpCache extractor_cache;
      const Matrix features = mlp_forward(model.extractor, batch, &extractor_cache);

      ShortTermResult short_term;
      ConsolidateResult consolidated;
      FuseResult fused;
      const Matrix* logits_input = &features;
      if (use_memory) {
        short_term = abstract_short_term(model.encoder, model.gates, features,
                                         variant != Variant::kNoShortGate);
        if (variant == Variant::kNoConsolidation) {
          consolidated.memory = short_term.memory;
        } else {
          consolidated = consolidate(model.gates, short_term.memory,
                                     model.memory.long_term);
        }
        fused = fuse_and_enhance(model.gates, model.decoder, consolidated.memory,
                                 collective.vec, features,
                                 variant != Variant::kNoCollectiveFusion);
        logits_input = &fused.enhanced;
      }

      const Matrix logits = linear_forward(model.classifier, *logits_input);
      const XentResult xent = softmax_cross_entropy(logits, labels);
      if (!std::isfinite(xent.loss))
        throw std::runtime_error("local_round: non-finite loss at agent " +
                                 std::to_string(model.id) + ", round " +
                                 std::to_string(round));
      loss_sum += xent.loss;
      ++batches;

      Matrix d_features = linear_backward(model.classifier, *logits_input,
                                          xent.logits_grad);
      if (use_memory) {
        const Vector d_long = fuse_and_enhance_backward(
            model.decoder, model.gates, fused.cache, d_features);
        const Vector d_short =
            variant == Variant::kNoConsolidation
                ? d_long
                : consolidate_backward(model.gates, consolidated.cache, d_long);
        add_inplace(d_features,
                    abstract_short_term_backward(model.encoder, model.gates,
                                                 short_term.cache, d_short));
      }
      mlp_backward(model.extractor, extractor_cache, d_features);

      for_each_layer(model, [&cfg](LinearLayer& layer, const std::string& name) {
        sgd_step(layer, cfg.lr, name);
      });

      if (use_memory) {
        // memory is state, not a parameter: the forward consolidation value
        // is kept even when lr is zero
        model.memory.short_term = short_term.memory;
        model.memory.long_term = consolidated.memory;
      }
    }
  }

  LocalRoundResult result;
  result.upload = use_memory ? model.memory.long_term : Vector(model.mem_dim);
  result.train_loss = loss_sum / static_cast<double>(batches);
  return result;
}

double evaluate(const AgentModel& model, const Dataset& test,
                const CollectiveMemory& collective, Variant variant) {
  if (test.size() == 0)
    throw std::invalid_argument("evaluate: empty test set");

  const Matrix features = mlp_forward(model.extractor, test.features, nullptr);
  Matrix enhanced;
  const Matrix* logits_input = &features;
  if (variant != Variant::kNoMemory) {
    enhanced = fuse_and_enhance(model.gates, model.decoder,
                                model.memory.long_term, collective.vec, features,
                                variant != Variant::kNoCollectiveFusion)
                   .enhanced;
    logits_input = &enhanced;
  }
  const Matrix logits = linear_forward(model.classifier, *logits_input);

  std::size_t correct = 0;
  for (std::size_t b = 0; b < logits.rows; ++b) {
    const double* row = logits.row(b);
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.cols; ++k)
      if (row[k] > row[best]) best = k;
    if (static_cast<int>(best) == test.labels[b]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace sohip
