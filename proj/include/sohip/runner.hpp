#pragma once

#include <string>
#include <vector>

#include "sohip/config.hpp"
#include "sohip/federation.hpp"

namespace sohip {

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_acc = 0.0;
  double final_train_loss = 0.0;
};

struct RunOutput {
  std::vector<MetricsLog> per_seed;
  std::vector<SeedSummary> summaries;
  std::vector<std::string> files_written;
};

// One full experiment per seed, in memory. Data, partition, and models are
// all derived from the per-run seed.
std::vector<MetricsLog> run_seeds(const ExperimentConfig& cfg);

// Runs every seed and writes metrics_seed<k>.csv plus summary.csv under
// cfg.output_dir. Partial outputs are removed if any seed fails.
RunOutput run(const ExperimentConfig& cfg);

struct SweepRow {
  double value = 0.0;
  double mean_final_acc = 0.0;
  double std_final_acc = 0.0;
};

// One full run per value per seed; writes sweep_<axis>.csv. Axis is one of
// classes_per_agent | alpha | mem_dim (m) | participation (C) | lr.
std::vector<SweepRow> sweep(const std::string& axis,
                            const std::vector<double>& values,
                            const ExperimentConfig& base_cfg);

// Sample standard deviation (n-1 denominator); zero for a single value.
double sample_std(const std::vector<double>& values);
double mean(const std::vector<double>& values);

// Deterministic CSV rendering used by all emitters.
std::string format_double(double v);

}  // namespace sohip
