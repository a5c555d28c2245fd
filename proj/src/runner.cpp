#include "sohip/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace sohip {

namespace fs = std::filesystem;

double mean(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

std::string render_metrics_csv(const MetricsLog& log) {
  std::string csv = "round,mean_test_acc,mean_train_loss,participants,uplink_bytes\n";
  for (const auto& rec : log.evals) {
    csv += std::to_string(rec.round) + ",";
    csv += format_double(rec.mean_test_acc) + ",";
    csv += format_double(rec.mean_train_loss) + ",";
    csv += std::to_string(rec.participants) + ",";
    csv += std::to_string(rec.uplink_bytes) + "\n";
  }
  return csv;
}

SeedSummary summarize(std::uint64_t seed, const MetricsLog& log) {
  SeedSummary s;
  s.seed = seed;
  s.final_acc = log.evals.back().mean_test_acc;
  s.final_train_loss = log.evals.back().mean_train_loss;
  return s;
}

MetricsLog run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                        bool per_seed_transcript) {
  ExperimentConfig seed_cfg = cfg;
  if (per_seed_transcript && !cfg.transcript_path.empty() && cfg.seeds.size() > 1)
    seed_cfg.transcript_path += ".seed" + std::to_string(seed);
  const Dataset dataset = build_dataset(seed_cfg, seed);
  const auto shards = build_shards(seed_cfg, dataset, seed);
  return run_experiment(seed_cfg, shards, seed);
}

}  // namespace

std::vector<MetricsLog> run_seeds(const ExperimentConfig& cfg) {
  validate_or_throw(cfg);
  std::vector<MetricsLog> logs;
  logs.reserve(cfg.seeds.size());
  for (std::uint64_t seed : cfg.seeds)
    logs.push_back(run_one_seed(cfg, seed, /*per_seed_transcript=*/true));
  return logs;
}

RunOutput run(const ExperimentConfig& cfg) {
  validate_or_throw(cfg);
  fs::create_directories(cfg.output_dir);

  RunOutput out;
  try {
    for (std::uint64_t seed : cfg.seeds) {
      MetricsLog log = run_one_seed(cfg, seed, /*per_seed_transcript=*/true);
      const std::string path =
          (fs::path(cfg.output_dir) / ("metrics_seed" + std::to_string(seed) + ".csv"))
              .string();
      write_file_atomic(path, render_metrics_csv(log));
      out.files_written.push_back(path);
      out.summaries.push_back(summarize(seed, log));
      out.per_seed.push_back(std::move(log));
    }

    std::vector<double> accs, losses;
    for (const auto& s : out.summaries) {
      accs.push_back(s.final_acc);
      losses.push_back(s.final_train_loss);
    }
    std::string summary = "seeds,mean_final_acc,std_final_acc,mean_final_loss,std_final_loss\n";
    summary += std::to_string(out.summaries.size()) + ",";
    summary += format_double(mean(accs)) + ",";
    summary += format_double(sample_std(accs)) + ",";
    summary += format_double(mean(losses)) + ",";
    summary += format_double(sample_std(losses)) + "\n";
    const std::string summary_path = (fs::path(cfg.output_dir) / "summary.csv").string();
    write_file_atomic(summary_path, summary);
    out.files_written.push_back(summary_path);
  } catch (...) {
    for (const auto& path : out.files_written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
  return out;
}

std::vector<SweepRow> sweep(const std::string& axis,
                            const std::vector<double>& values,
                            const ExperimentConfig& base_cfg) {
  if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");

  const auto apply = [&axis](ExperimentConfig& cfg, double value) {
    if (axis == "classes_per_agent") {
      cfg.classes_per_agent = static_cast<std::size_t>(value);
    } else if (axis == "alpha") {
      cfg.alpha = value;
      cfg.partition_mode = PartitionMode::kDirichlet;
    } else if (axis == "mem_dim" || axis == "m") {
      cfg.mem_dim = static_cast<std::size_t>(value);
    } else if (axis == "participation" || axis == "C") {
      cfg.participation = value;
    } else if (axis == "lr") {
      cfg.lr = value;
    } else {
      throw std::invalid_argument(
          "sweep: unknown axis '" + axis +
          "' (expected classes_per_agent|alpha|mem_dim|participation|lr)");
    }
  };

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    ExperimentConfig cfg = base_cfg;  // each point works on its own copy
    apply(cfg, value);
    const auto logs = run_seeds(cfg);
    std::vector<double> accs;
    accs.reserve(logs.size());
    for (const auto& log : logs) accs.push_back(log.evals.back().mean_test_acc);
    rows.push_back({value, mean(accs), sample_std(accs)});
  }

  fs::create_directories(base_cfg.output_dir);
  std::string csv = "value,mean_final_acc,std_final_acc\n";
  for (const auto& row : rows) {
    csv += format_double(row.value) + ",";
    csv += format_double(row.mean_final_acc) + ",";
    csv += format_double(row.std_final_acc) + "\n";
  }
  const std::string axis_name = axis == "m" ? "mem_dim"
                                : axis == "C" ? "participation"
                                              : axis;
  write_file_atomic(
      (fs::path(base_cfg.output_dir) / ("sweep_" + axis_name + ".csv")).string(),
      csv);
  return rows;
}

}  // namespace sohip
