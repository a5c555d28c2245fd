#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sohip/rng.hpp"
#include "sohip/tensor.hpp"

namespace sohip {

struct Dataset {
  Matrix features;          // n x d_in
  std::vector<int> labels;  // n entries, each in [0, num_classes)
  std::size_t num_classes = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols; }
};

struct AgentShard {
  std::uint32_t agent_id = 0;
  Dataset train;
  Dataset test;
  std::set<int> class_set;  // distinct labels this agent holds
};

enum class PartitionMode { kPathological, kDirichlet };

struct PartitionSpec {
  PartitionMode mode = PartitionMode::kPathological;
  std::size_t classes_per_agent = 2;  // pathological
  double alpha = 0.5;                 // dirichlet concentration
  std::size_t num_agents = 1;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Gaussian mixture: class k is drawn around a unit-norm random center with
// isotropic noise of scale `spread`; labels are balanced.
Dataset generate_synthetic(Rng& rng, std::size_t num_classes,
                           std::size_t feature_dim, std::size_t per_class,
                           double spread);

// Rows are `label,f1,...,fd` with a constant field count. Feature columns
// are min-max normalized to [0,1]; constant columns normalize to zero.
Dataset load_csv(const std::string& path);

// Each agent draws `classes_per_agent` distinct classes (independently, so
// assignments may overlap across agents); a class's samples are divided
// evenly among its holders.
std::vector<AgentShard> partition_pathological(const Dataset& ds,
                                               const PartitionSpec& spec);

// Per class, proportions drawn from Dir(alpha * 1_N) and rounded by largest
// remainder; agents left empty receive one sample from the largest shard.
std::vector<AgentShard> partition_dirichlet(const Dataset& ds,
                                            const PartitionSpec& spec);

std::vector<AgentShard> partition(const Dataset& ds, const PartitionSpec& spec);

}  // namespace sohip
