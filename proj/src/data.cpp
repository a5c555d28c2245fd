#include "sohip/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sohip {

namespace {

// Per-agent sample assignment as indices into the source dataset, grouped by
// class so the train/test split can be stratified.
using Assignment = std::vector<std::vector<std::size_t>>;  // [agent] -> rows

std::vector<std::vector<std::size_t>> rows_by_class(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t r = 0; r < ds.size(); ++r)
    by_class[static_cast<std::size_t>(ds.labels[r])].push_back(r);
  return by_class;
}

Dataset gather_rows(const Dataset& ds, const std::vector<std::size_t>& rows,
                    const std::string& name) {
  Dataset out;
  out.num_classes = ds.num_classes;
  out.name = name;
  out.features = Matrix(rows.size(), ds.feature_dim());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* src = ds.features.row(rows[i]);
    std::copy(src, src + ds.feature_dim(), out.features.row(i));
    out.labels.push_back(ds.labels[rows[i]]);
  }
  return out;
}

// Stratified per-class split keeping at least one sample of every class in
// train, so the test class set is always a subset of the train class set.
AgentShard build_shard(const Dataset& ds, std::uint32_t agent_id,
                       const std::vector<std::size_t>& rows,
                       double test_fraction) {
  std::vector<std::vector<std::size_t>> per_class(ds.num_classes);
  for (std::size_t r : rows)
    per_class[static_cast<std::size_t>(ds.labels[r])].push_back(r);

  std::vector<std::size_t> train_rows, test_rows;
  AgentShard shard;
  shard.agent_id = agent_id;
  std::size_t spare_class = per_class.size();  // a class able to donate a test row
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    const auto& members = per_class[k];
    if (members.empty()) continue;
    shard.class_set.insert(static_cast<int>(k));
    std::size_t n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(members.size())));
    n_test = std::min(n_test, members.size() - 1);
    if (n_test == 0 && members.size() >= 2 &&
        (spare_class == per_class.size() ||
         members.size() > per_class[spare_class].size()))
      spare_class = k;
    const std::size_t n_train = members.size() - n_test;
    train_rows.insert(train_rows.end(), members.begin(),
                      members.begin() + n_train);
    test_rows.insert(test_rows.end(), members.begin() + n_train, members.end());
  }
  // tiny shards can round every class's test share down to zero; keep the
  // agent evaluable by promoting one train row of a class that retains one
  if (test_rows.empty() && spare_class < per_class.size()) {
    const std::size_t donor = per_class[spare_class].back();
    train_rows.erase(std::find(train_rows.begin(), train_rows.end(), donor));
    test_rows.push_back(donor);
  }
  const std::string tag = "agent" + std::to_string(agent_id);
  shard.train = gather_rows(ds, train_rows, ds.name + "/" + tag + "/train");
  shard.test = gather_rows(ds, test_rows, ds.name + "/" + tag + "/test");
  return shard;
}

std::vector<AgentShard> build_shards(const Dataset& ds,
                                     const Assignment& assignment,
                                     double test_fraction) {
  std::vector<AgentShard> shards;
  shards.reserve(assignment.size());
  for (std::size_t a = 0; a < assignment.size(); ++a)
    shards.push_back(build_shard(ds, static_cast<std::uint32_t>(a),
                                 assignment[a], test_fraction));
  return shards;
}

}  // namespace

Dataset generate_synthetic(Rng& rng, std::size_t num_classes,
                           std::size_t feature_dim, std::size_t per_class,
                           double spread) {
  if (num_classes < 2)
    throw std::invalid_argument("generate_synthetic: need at least 2 classes");
  if (per_class < 2)
    throw std::invalid_argument("generate_synthetic: need at least 2 samples per class");

  std::vector<Vector> centers;
  centers.reserve(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    Vector c(feature_dim);
    double norm = 0.0;
    for (std::size_t j = 0; j < feature_dim; ++j) {
      c[j] = rng.normal();
      norm += c[j] * c[j];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) norm = 1.0;
    for (std::size_t j = 0; j < feature_dim; ++j) c[j] /= norm;
    centers.push_back(std::move(c));
  }

  Dataset ds;
  ds.num_classes = num_classes;
  ds.name = "synthetic";
  ds.features = Matrix(num_classes * per_class, feature_dim);
  ds.labels.reserve(num_classes * per_class);
  std::size_t row = 0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      double* dst = ds.features.row(row);
      for (std::size_t j = 0; j < feature_dim; ++j)
        dst[j] = centers[k][j] + spread * rng.normal();
      ds.labels.push_back(static_cast<int>(k));
    }
  }
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  int max_label = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t consumed = 0;
      double value;
      try {
        value = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: non-numeric cell '" + cell +
                                 "' at line " + std::to_string(line_no));
      }
      while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
        ++consumed;
      if (consumed != cell.size())
        throw std::runtime_error("load_csv: non-numeric cell '" + cell +
                                 "' at line " + std::to_string(line_no));
      fields.push_back(value);
    }
    if (fields.size() < 2)
      throw std::runtime_error("load_csv: need a label and at least one feature at line " +
                               std::to_string(line_no));
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw std::runtime_error("load_csv: ragged row (" +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width) + ") at line " +
                               std::to_string(line_no));
    }
    const double raw_label = fields[0];
    if (raw_label < 0.0 || raw_label != std::floor(raw_label))
      throw std::runtime_error("load_csv: label must be a non-negative integer at line " +
                               std::to_string(line_no));
    labels.push_back(static_cast<int>(raw_label));
    max_label = std::max(max_label, labels.back());
    fields.erase(fields.begin());
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: empty file " + path);

  const std::size_t dim = width - 1;
  Dataset ds;
  ds.name = path;
  ds.num_classes = static_cast<std::size_t>(max_label) + 1;
  ds.labels = std::move(labels);
  ds.features = Matrix(rows.size(), dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double lo = rows[0][j], hi = rows[0][j];
    for (const auto& r : rows) {
      lo = std::min(lo, r[j]);
      hi = std::max(hi, r[j]);
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < rows.size(); ++i)
      ds.features.at(i, j) = range > 0.0 ? (rows[i][j] - lo) / range : 0.0;
  }
  return ds;
}

std::vector<AgentShard> partition_pathological(const Dataset& ds,
                                               const PartitionSpec& spec) {
  if (spec.mode != PartitionMode::kPathological)
    throw std::invalid_argument("partition_pathological: wrong mode in spec");
  if (spec.classes_per_agent < 1 || spec.classes_per_agent > ds.num_classes)
    throw std::invalid_argument(
        "partition_pathological: classes_per_agent must be in [1, num_classes]");

  Rng rng = Rng::stream(spec.seed, 0, 0, StreamPurpose::kPartition);
  const std::size_t n_agents = spec.num_agents;

  std::vector<std::set<int>> chosen(n_agents);
  std::vector<std::vector<std::uint32_t>> holders(ds.num_classes);
  for (std::size_t a = 0; a < n_agents; ++a) {
    const auto picks = rng.sample_without_replacement(
        static_cast<std::uint32_t>(ds.num_classes),
        static_cast<std::uint32_t>(spec.classes_per_agent));
    for (std::uint32_t k : picks) {
      chosen[a].insert(static_cast<int>(k));
      holders[k].push_back(static_cast<std::uint32_t>(a));
    }
  }

  Assignment assignment(n_agents);
  auto by_class = rows_by_class(ds);
  for (std::size_t k = 0; k < ds.num_classes; ++k) {
    if (holders[k].empty()) continue;  // class with no holder is dropped
    auto& members = by_class[k];
    rng.shuffle(members);
    const std::size_t n_holders = holders[k].size();
    const std::size_t base = members.size() / n_holders;
    const std::size_t extra = members.size() % n_holders;
    std::size_t pos = 0;
    for (std::size_t h = 0; h < n_holders; ++h) {
      const std::size_t take = base + (h < extra ? 1 : 0);
      auto& dest = assignment[holders[k][h]];
      dest.insert(dest.end(), members.begin() + pos, members.begin() + pos + take);
      pos += take;
    }
  }

  for (std::size_t a = 0; a < n_agents; ++a) {
    if (assignment[a].empty())
      throw std::runtime_error("partition_pathological: agent " +
                               std::to_string(a) + " received no samples");
  }
  return build_shards(ds, assignment, spec.test_fraction);
}

std::vector<AgentShard> partition_dirichlet(const Dataset& ds,
                                            const PartitionSpec& spec) {
  if (spec.mode != PartitionMode::kDirichlet)
    throw std::invalid_argument("partition_dirichlet: wrong mode in spec");
  if (spec.alpha <= 0.0)
    throw std::invalid_argument("partition_dirichlet: alpha must be > 0");

  Rng rng = Rng::stream(spec.seed, 0, 0, StreamPurpose::kPartition);
  const std::size_t n_agents = spec.num_agents;
  Assignment assignment(n_agents);
  auto by_class = rows_by_class(ds);

  for (std::size_t k = 0; k < ds.num_classes; ++k) {
    auto& members = by_class[k];
    if (members.empty()) continue;
    rng.shuffle(members);

    std::vector<double> props(n_agents);
    double total = 0.0;
    for (std::size_t a = 0; a < n_agents; ++a) {
      props[a] = rng.gamma(spec.alpha);
      total += props[a];
    }
    if (total <= 0.0) {
      std::fill(props.begin(), props.end(), 1.0);
      total = static_cast<double>(n_agents);
    }

    // largest-remainder rounding of members.size() * props / total
    std::vector<std::size_t> counts(n_agents);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t a = 0; a < n_agents; ++a) {
      const double share =
          static_cast<double>(members.size()) * props[a] / total;
      counts[a] = static_cast<std::size_t>(std::floor(share));
      assigned += counts[a];
      remainders.emplace_back(share - std::floor(share), a);
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& lhs, const auto& rhs) {
                if (lhs.first != rhs.first) return lhs.first > rhs.first;
                return lhs.second < rhs.second;
              });
    for (std::size_t i = 0; assigned < members.size(); ++i, ++assigned)
      counts[remainders[i % remainders.size()].second] += 1;

    std::size_t pos = 0;
    for (std::size_t a = 0; a < n_agents; ++a) {
      auto& dest = assignment[a];
      dest.insert(dest.end(), members.begin() + pos, members.begin() + pos + counts[a]);
      pos += counts[a];
    }
  }

  // repair: every agent must hold at least one sample
  for (std::size_t a = 0; a < n_agents; ++a) {
    if (!assignment[a].empty()) continue;
    std::size_t largest = 0;
    for (std::size_t b = 1; b < n_agents; ++b)
      if (assignment[b].size() > assignment[largest].size()) largest = b;
    if (assignment[largest].size() <= 1)
      throw std::runtime_error("partition_dirichlet: not enough samples to cover all agents");
    assignment[a].push_back(assignment[largest].back());
    assignment[largest].pop_back();
  }
  return build_shards(ds, assignment, spec.test_fraction);
}

std::vector<AgentShard> partition(const Dataset& ds, const PartitionSpec& spec) {
  return spec.mode == PartitionMode::kPathological
             ? partition_pathological(ds, spec)
             : partition_dirichlet(ds, spec);
}

}  // namespace sohip
