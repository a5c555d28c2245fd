#include "sohip/federation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sohip {

namespace {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_limit(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> hold(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double mean_accuracy(const std::vector<AgentModel>& models,
                     const std::vector<AgentShard>& shards,
                     const CollectiveMemory& collective, Variant variant,
                     std::vector<double>* per_agent) {
  std::vector<double> accs(models.size());
  parallel_for(models.size(), [&](std::size_t i) {
    accs[i] = evaluate(models[i], shards[i].test, collective, variant);
  });
  const double total = std::accumulate(accs.begin(), accs.end(), 0.0);
  if (per_agent) *per_agent = std::move(accs);
  return total / static_cast<double>(models.size());
}

}  // namespace

std::size_t worker_limit() {
  if (const char* env = std::getenv("SOHIP_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1) return static_cast<std::size_t>(parsed);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

RoundPlan sample_participants(Rng& rng, std::size_t num_agents,
                              double participation, std::uint32_t round,
                              const std::vector<std::size_t>& train_sizes) {
  if (train_sizes.size() != num_agents)
    throw std::invalid_argument("sample_participants: train_sizes size mismatch");
  const std::size_t take = static_cast<std::size_t>(
      std::floor(participation * static_cast<double>(num_agents)));
  if (take < 1)
    throw std::invalid_argument(
        "sample_participants: floor(participation * agents) must be >= 1");

  RoundPlan plan;
  plan.round = round;
  plan.participants = rng.sample_without_replacement(
      static_cast<std::uint32_t>(num_agents), static_cast<std::uint32_t>(take));

  double total = 0.0;
  for (std::uint32_t id : plan.participants)
    total += static_cast<double>(train_sizes[id]);
  plan.weights.reserve(take);
  for (std::uint32_t id : plan.participants)
    plan.weights.push_back(static_cast<double>(train_sizes[id]) / total);
  return plan;
}

Vector aggregate(const std::vector<std::pair<std::uint32_t, Vector>>& uploads,
                 const RoundPlan& plan) {
  std::vector<std::pair<std::uint32_t, const Vector*>> sorted;
  sorted.reserve(uploads.size());
  for (const auto& [id, vec] : uploads) sorted.emplace_back(id, &vec);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i].first == sorted[i + 1].first)
      throw std::runtime_error("aggregate: duplicate upload from agent " +
                               std::to_string(sorted[i].first));
  }
  for (std::size_t i = 0; i < std::max(sorted.size(), plan.participants.size());
       ++i) {
    if (i >= sorted.size() || (i < plan.participants.size() &&
                               sorted[i].first > plan.participants[i]))
      throw std::runtime_error("aggregate: missing upload from agent " +
                               std::to_string(plan.participants[i]));
    if (i >= plan.participants.size() || sorted[i].first < plan.participants[i])
      throw std::runtime_error("aggregate: unexpected upload from agent " +
                               std::to_string(sorted[i].first));
  }

  Vector out(sorted.empty() ? 0 : sorted.front().second->dim());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Vector& vec = *sorted[i].second;
    if (vec.dim() != out.dim())
      throw_shape_error("aggregate", vec.dim(), out.dim());
    for (std::size_t j = 0; j < out.dim(); ++j)
      out[j] += plan.weights[i] * vec[j];
  }
  if (!all_finite(out))
    throw std::runtime_error("aggregate: non-finite collective memory");
  return out;
}

void write_transcript(const std::string& path,
                      const std::vector<std::vector<std::uint8_t>>& frames) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open transcript file " + tmp);
    for (const auto& frame : frames) {
      const std::uint32_t len = static_cast<std::uint32_t>(frame.size());
      const std::uint8_t prefix[4] = {
          static_cast<std::uint8_t>(len & 0xff),
          static_cast<std::uint8_t>((len >> 8) & 0xff),
          static_cast<std::uint8_t>((len >> 16) & 0xff),
          static_cast<std::uint8_t>(len >> 24)};
      out.write(reinterpret_cast<const char*>(prefix), 4);
      out.write(reinterpret_cast<const char*>(frame.data()),
                static_cast<std::streamsize>(frame.size()));
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

std::vector<std::vector<std::uint8_t>> read_transcript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open transcript file " + path);
  std::vector<std::vector<std::uint8_t>> frames;
  for (;;) {
    std::uint8_t prefix[4];
    in.read(reinterpret_cast<char*>(prefix), 4);
    if (in.gcount() == 0) break;
    if (in.gcount() != 4)
      throw std::runtime_error("transcript: truncated length prefix");
    const std::uint32_t len = static_cast<std::uint32_t>(prefix[0]) |
                              (static_cast<std::uint32_t>(prefix[1]) << 8) |
                              (static_cast<std::uint32_t>(prefix[2]) << 16) |
                              (static_cast<std::uint32_t>(prefix[3]) << 24);
    std::vector<std::uint8_t> frame(len);
    in.read(reinterpret_cast<char*>(frame.data()), len);
    if (in.gcount() != static_cast<std::streamsize>(len))
      throw std::runtime_error("transcript: truncated frame");
    frames.push_back(std::move(frame));
  }
  return frames;
}

Dataset build_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.csv_path.empty()) return load_csv(cfg.csv_path);
  Rng rng = Rng::stream(seed, 0, 0, StreamPurpose::kDataGen);
  return generate_synthetic(rng, cfg.synthetic.num_classes,
                            cfg.synthetic.feature_dim, cfg.synthetic.per_class,
                            cfg.synthetic.spread);
}

std::vector<AgentShard> build_shards(const ExperimentConfig& cfg,
                                     const Dataset& dataset,
                                     std::uint64_t seed) {
  return partition(dataset, partition_spec(cfg, seed));
}

std::vector<AgentModel> build_agents(const ExperimentConfig& cfg,
                                     const std::vector<AgentShard>& shards,
                                     std::uint64_t seed) {
  std::vector<AgentModel> models;
  models.reserve(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    const std::size_t feature_dim = cfg.feature_dims[i % cfg.feature_dims.size()];
    const std::size_t hidden_layers = 1 + (i % 2);
    models.push_back(make_agent_model(
        seed, static_cast<std::uint32_t>(i), shards[i].train.feature_dim(),
        feature_dim, hidden_layers, shards[i].train.num_classes, cfg.mem_dim));
  }
  return models;
}

MetricsLog run_experiment(const ExperimentConfig& cfg,
                          const std::vector<AgentShard>& shards,
                          std::uint64_t seed) {
  validate_or_throw(cfg);
  if (shards.size() != cfg.num_agents)
    throw std::invalid_argument("run_experiment: shard count does not match agents");

  const bool standalone = cfg.mode == RunMode::kStandalone;
  const Variant variant = standalone ? Variant::kNoMemory : cfg.variant;
  const bool messaging = !standalone;

  std::vector<AgentModel> models = build_agents(cfg, shards, seed);
  std::vector<std::size_t> train_sizes;
  train_sizes.reserve(shards.size());
  for (const auto& shard : shards) train_sizes.push_back(shard.train.size());

  LocalTrainConfig train_cfg;
  train_cfg.batch_size = cfg.batch_size;
  train_cfg.local_epochs = cfg.local_epochs;
  train_cfg.lr = cfg.lr;
  train_cfg.variant = variant;

  MetricsLog log;
  std::vector<std::vector<std::uint8_t>> transcript;
  const bool dump_transcript = messaging && !cfg.transcript_path.empty();

  Vector collective_state(cfg.mem_dim);  // M^{L,0} = 0
  // agents only ever see the wire-quantized collective; evaluation uses the
  // latest broadcast, i.e. the value agents trained against this round
  CollectiveMemory latest_broadcast(cfg.mem_dim);

  const auto record_eval = [&](std::uint32_t round, std::uint32_t participants,
                               std::uint64_t uplink_bytes) {
    std::vector<double> per_agent;
    const double acc =
        mean_accuracy(models, shards, latest_broadcast, variant, &per_agent);
    EvalRecord rec;
    rec.round = round;
    rec.mean_test_acc = acc;
    rec.mean_train_loss = round == 0 ? std::nan("")
                                     : log.round_train_loss[round - 1];
    rec.participants = participants;
    rec.uplink_bytes = uplink_bytes;
    log.evals.push_back(rec);
    log.final_agent_acc = std::move(per_agent);
  };

  record_eval(0, 0, 0);

  for (std::uint32_t t = 1; t <= cfg.rounds; ++t) {
    Rng sample_rng = Rng::stream(seed, 0, t, StreamPurpose::kSampling);
    const RoundPlan plan = sample_participants(sample_rng, cfg.num_agents,
                                               cfg.participation, t, train_sizes);

    std::uint64_t uplink_bytes = 0;
    if (messaging) {
      // broadcast M^{L,t-1}
      auto frame = encode(make_broadcast(t, collective_state));
      log.total_message_bytes += frame.size();
      log.message_count += 1;
      if (dump_transcript) transcript.push_back(std::move(frame));
    }
    const CollectiveMemory broadcast_view = agent_view(t - 1);

    std::vector<LocalRoundResult> results(plan.participants.size());
    parallel_for(plan.participants.size(), [&](std::size_t i) {
      const std::uint32_t id = plan.participants[i];
      results[i] = local_round(models[id], shards[id], broadcast_view,
                               train_cfg, seed, t);
    });

    double loss_sum = 0.0;
    for (const auto& r : results) loss_sum += r.train_loss;
    log.round_train_loss.push_back(loss_sum /
                                   static_cast<double>(results.size()));

    if (messaging) {
      std::vector<std::pair<std::uint32_t, Vector>> uploads;
      uploads.reserve(plan.participants.size());
      for (std::size_t i = 0; i < plan.participants.size(); ++i) {
        const std::uint32_t id = plan.participants[i];
        auto frame = encode(make_upload(t, id, results[i].upload));
        log.total_message_bytes += frame.size();
        log.message_count += 1;
        uplink_bytes += frame.size();
        const MemoryUploadMsg received = decode_upload(frame);
        uploads.emplace_back(received.agent_id, dequantize(received.payload));
        if (dump_transcript) transcript.push_back(std::move(frame));
      }
      collective_state = aggregate(uploads, plan);
      log.last_uploads = std::move(uploads);
      log.final_collective = collective_state;
    }

    if (t % cfg.eval_interval == 0 || t == cfg.rounds)
      record_eval(t, static_cast<std::uint32_t>(plan.participants.size()),
                  uplink_bytes);
  }

  if (dump_transcript) write_transcript(cfg.transcript_path, transcript);
  return log;
}

MetricsLog run_standalone(const ExperimentConfig& cfg,
                          const std::vector<AgentShard>& shards,
                          std::uint64_t seed) {
  ExperimentConfig standalone_cfg = cfg;
  standalone_cfg.mode = RunMode::kStandalone;
  return run_experiment(standalone_cfg, shards, seed);
}

}  // namespace sohip
