#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "sohip/data.hpp"
#include "sohip/memory.hpp"
#include "sohip/nn.hpp"

namespace sohip {

enum class Variant { kFull, kNoShortGate, kNoConsolidation, kNoCollectiveFusion, kNoMemory };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// One agent's private stack. Nothing in here is ever serialized into
// cross-agent traffic except the long-term memory vector.
struct AgentModel {
  std::uint32_t id = 0;
  std::size_t input_dim = 0;
  std::size_t feature_dim = 0;  // d_i, heterogeneous across agents
  std::size_t num_classes = 0;
  std::size_t mem_dim = 0;

  Mlp extractor;          // input_dim -> feature_dim, ReLU between layers
  LinearLayer classifier; // feature_dim -> num_classes
  LinearLayer encoder;    // feature_dim -> mem_dim
  LinearLayer decoder;    // mem_dim -> feature_dim
  GateBank gates;
  MemoryState memory;
};

// hidden_layers in {1, 2}; hidden width equals feature_dim. Initialization
// draws from the (seed, agent_id) model-init stream, so models are
// identical across runs and schedules.
AgentModel make_agent_model(std::uint64_t seed, std::uint32_t agent_id,
                            std::size_t input_dim, std::size_t feature_dim,
                            std::size_t hidden_layers, std::size_t num_classes,
                            std::size_t mem_dim);

// Visits every trainable layer with a stable name, in a fixed order.
void for_each_layer(AgentModel& model,
                    const std::function<void(LinearLayer&, const std::string&)>& fn);
void for_each_layer(const AgentModel& model,
                    const std::function<void(const LinearLayer&, const std::string&)>& fn);

struct LocalTrainConfig {
  std::size_t batch_size = 32;
  std::size_t local_epochs = 2;
  double lr = 0.01;
  Variant variant = Variant::kFull;
};

struct LocalRoundResult {
  Vector upload;      // long-term memory (zero vector under kNoMemory)
  double train_loss;  // mean over batches
};

// One communication round of local training: per batch, extract features,
// run the memory pipeline per variant, classify, backprop, and SGD-step all
// trainable parameters. The stored long-term memory is overwritten by each
// batch's consolidation output; the value after the final batch is uploaded.
LocalRoundResult local_round(AgentModel& model, const AgentShard& shard,
                             const CollectiveMemory& collective,
                             const LocalTrainConfig& cfg, std::uint64_t seed,
                             std::uint32_t round);

// Pure forward accuracy on a test set, fusing the stored long-term memory
// with the given collective. No state is mutated and no consolidation runs.
double evaluate(const AgentModel& model, const Dataset& test,
                const CollectiveMemory& collective, Variant variant);

}  // namespace sohip
