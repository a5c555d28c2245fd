#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sohip/agent.hpp"
#include "sohip/data.hpp"

namespace sohip {

enum class RunMode { kSohip, kStandalone };

std::string mode_name(RunMode m);
RunMode mode_from_name(const std::string& name);

struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t feature_dim = 16;
  std::size_t per_class = 200;
  double spread = 0.6;
};

// Full declarative description of one run. Defaults are the desk-scale
// synthetic benchmark.
struct ExperimentConfig {
  std::string csv_path;  // empty selects the synthetic generator
  SyntheticSpec synthetic;

  PartitionMode partition_mode = PartitionMode::kPathological;
  std::size_t classes_per_agent = 2;
  double alpha = 0.5;
  double test_fraction = 0.2;

  std::size_t num_agents = 20;   // N
  double participation = 0.5;    // C
  std::size_t rounds = 100;      // T
  std::size_t mem_dim = 8;       // m
  std::vector<std::size_t> feature_dims = {16, 24, 32, 48};  // d_i cycle

  std::size_t batch_size = 32;
  std::size_t local_epochs = 2;
  double lr = 0.01;
  std::size_t eval_interval = 5;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  Variant variant = Variant::kFull;
  RunMode mode = RunMode::kSohip;
  std::string output_dir = "out";
  std::string transcript_path;  // empty disables the frame dump
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Collects every violation rather than stopping at the first.
std::vector<std::string> validate(const ExperimentConfig& cfg);
void validate_or_throw(const ExperimentConfig& cfg);

// Flat key=value text file; '#' starts a comment; unknown keys are
// rejected. Values already set by the file can be overridden afterwards by
// CLI flags (flags win).
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

PartitionSpec partition_spec(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace sohip
