#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sohip/agent.hpp"
#include "sohip/config.hpp"
#include "sohip/data.hpp"
#include "sohip/wire.hpp"

namespace sohip {

struct RoundPlan {
  std::uint32_t round = 0;
  std::vector<std::uint32_t> participants;  // ascending agent ids
  std::vector<double> weights;              // sums to 1 over participants
};

// Uniform sample without replacement of floor(C * N) agents; weights are
// train-shard sizes renormalized over the sampled set.
RoundPlan sample_participants(Rng& rng, std::size_t num_agents,
                              double participation, std::uint32_t round,
                              const std::vector<std::size_t>& train_sizes);

// Weighted sum of uploads in ascending agent-id order, so the result is
// independent of delivery schedule. Uploads must cover the plan exactly.
Vector aggregate(const std::vector<std::pair<std::uint32_t, Vector>>& uploads,
                 const RoundPlan& plan);

struct EvalRecord {
  std::uint32_t round = 0;
  double mean_test_acc = 0.0;
  double mean_train_loss = 0.0;
  std::uint32_t participants = 0;
  std::uint64_t uplink_bytes = 0;
};

struct MetricsLog {
  std::vector<EvalRecord> evals;
  std::vector<double> round_train_loss;  // entry t-1 is round t's participant mean
  std::vector<double> final_agent_acc;   // per agent, at the last evaluation
  std::uint64_t message_count = 0;
  std::uint64_t total_message_bytes = 0;

  // server-side view of the last completed round, for inspection
  std::vector<std::pair<std::uint32_t, Vector>> last_uploads;
  Vector final_collective;
};

// Length-prefixed frame dump of every message that crossed the
// agent/server boundary: u32 length followed by the raw message bytes.
void write_transcript(const std::string& path,
                      const std::vector<std::vector<std::uint8_t>>& frames);
std::vector<std::vector<std::uint8_t>> read_transcript(const std::string& path);

Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t seed);
std::vector<AgentShard> build_shards(const ExperimentConfig& cfg,
                                     const Dataset& dataset, std::uint64_t seed);
// Feature dims cycle through cfg.feature_dims; hidden depth alternates 1/2.
std::vector<AgentModel> build_agents(const ExperimentConfig& cfg,
                                     const std::vector<AgentShard>& shards,
                                     std::uint64_t seed);

// The full round loop: sample, broadcast, parallel local rounds, collect
// uploads, aggregate, periodic evaluation of all agents. Standalone mode
// runs the same loop with no messages and no memory modules.
MetricsLog run_experiment(const ExperimentConfig& cfg,
                          const std::vector<AgentShard>& shards,
                          std::uint64_t seed);

MetricsLog run_standalone(const ExperimentConfig& cfg,
                          const std::vector<AgentShard>& shards,
                          std::uint64_t seed);

// Worker cap for intra-round parallelism: SOHIP_THREADS when set, else the
// hardware concurrency.
std::size_t worker_limit();

}  // namespace sohip
