#include "sohip/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sohip {

std::string mode_name(RunMode m) {
  return m == RunMode::kSohip ? "sohip" : "standalone";
}

RunMode mode_from_name(const std::string& name) {
  if (name == "sohip") return RunMode::kSohip;
  if (name == "standalone") return RunMode::kStandalone;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected sohip|standalone)");
}

ConfigError::ConfigError(const std::vector<std::string>& violations)
    : std::runtime_error([&violations] {
        std::string what = "invalid configuration:";
        for (const auto& v : violations) what += "\n  - " + v;
        return what;
      }()),
      violations_(violations) {}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out;
  in >> out;
  if (in.fail() || !in.eof())
    throw std::invalid_argument("config key '" + key + "': cannot parse '" +
                                value + "'");
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_number<T>(key, item));
  if (out.empty())
    throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> violations;
  const auto fail = [&violations](const std::string& msg) {
    violations.push_back(msg);
  };

  if (cfg.csv_path.empty()) {
    if (cfg.synthetic.num_classes < 2) fail("synthetic classes must be >= 2");
    if (cfg.synthetic.feature_dim < 1) fail("synthetic feature_dim must be >= 1");
    if (cfg.synthetic.per_class < 2) fail("synthetic per_class must be >= 2");
    if (cfg.synthetic.spread < 0.0) fail("synthetic spread must be >= 0");
    if (cfg.partition_mode == PartitionMode::kPathological &&
        cfg.classes_per_agent > cfg.synthetic.num_classes)
      fail("classes_per_agent exceeds the number of classes");
  }
  if (cfg.partition_mode == PartitionMode::kPathological &&
      cfg.classes_per_agent < 1)
    fail("classes_per_agent must be >= 1");
  if (cfg.partition_mode == PartitionMode::kDirichlet && cfg.alpha <= 0.0)
    fail("dirichlet alpha must be > 0");
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
    fail("test_fraction must be in (0, 1)");

  if (cfg.num_agents < 1) fail("agents must be >= 1");
  if (cfg.participation <= 0.0 || cfg.participation > 1.0)
    fail("participation must be in (0, 1]");
  if (cfg.num_agents >= 1 &&
      static_cast<std::size_t>(std::floor(
          cfg.participation * static_cast<double>(cfg.num_agents))) < 1)
    fail("floor(participation * agents) must be >= 1");
  if (cfg.mem_dim < 1) fail("mem_dim must be >= 1");
  if (cfg.feature_dims.empty()) {
    fail("feature_dims must be nonempty");
  } else {
    const std::size_t min_dim =
        *std::min_element(cfg.feature_dims.begin(), cfg.feature_dims.end());
    if (cfg.mem_dim > min_dim)
      fail("mem_dim (" + std::to_string(cfg.mem_dim) +
           ") must be <= the smallest agent feature dim (" +
           std::to_string(min_dim) + ")");
  }
  if (cfg.batch_size < 1) fail("batch_size must be >= 1");
  if (cfg.local_epochs < 1) fail("local_epochs must be >= 1");
  if (cfg.lr <= 0.0) fail("lr must be > 0");
  if (cfg.eval_interval < 1) fail("eval_interval must be >= 1");
  if (cfg.seeds.empty()) fail("seeds must be nonempty");
  if (cfg.output_dir.empty()) fail("output_dir must be nonempty");
  return violations;
}

void validate_or_throw(const ExperimentConfig& cfg) {
  const auto violations = validate(cfg);
  if (!violations.empty()) throw ConfigError(violations);
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "dataset") {
    if (value == "synthetic") {
      cfg.csv_path.clear();
    } else if (value != "csv") {
      throw std::invalid_argument("config key 'dataset': expected synthetic|csv");
    }
  } else if (key == "csv_path") {
    cfg.csv_path = value;
  } else if (key == "classes") {
    cfg.synthetic.num_classes = parse_number<std::size_t>(key, value);
  } else if (key == "input_dim") {
    cfg.synthetic.feature_dim = parse_number<std::size_t>(key, value);
  } else if (key == "per_class") {
    cfg.synthetic.per_class = parse_number<std::size_t>(key, value);
  } else if (key == "spread") {
    cfg.synthetic.spread = parse_number<double>(key, value);
  } else if (key == "partition") {
    if (value == "pathological") {
      cfg.partition_mode = PartitionMode::kPathological;
    } else if (value == "dirichlet") {
      cfg.partition_mode = PartitionMode::kDirichlet;
    } else {
      throw std::invalid_argument(
          "config key 'partition': expected pathological|dirichlet");
    }
  } else if (key == "classes_per_agent") {
    cfg.classes_per_agent = parse_number<std::size_t>(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_number<double>(key, value);
  } else if (key == "test_fraction") {
    cfg.test_fraction = parse_number<double>(key, value);
  } else if (key == "agents") {
    cfg.num_agents = parse_number<std::size_t>(key, value);
  } else if (key == "participation") {
    cfg.participation = parse_number<double>(key, value);
  } else if (key == "rounds") {
    cfg.rounds = parse_number<std::size_t>(key, value);
  } else if (key == "mem_dim") {
    cfg.mem_dim = parse_number<std::size_t>(key, value);
  } else if (key == "feature_dims") {
    cfg.feature_dims = parse_list<std::size_t>(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "local_epochs") {
    cfg.local_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "lr") {
    cfg.lr = parse_number<double>(key, value);
  } else if (key == "eval_interval") {
    cfg.eval_interval = parse_number<std::size_t>(key, value);
  } else if (key == "seeds") {
    cfg.seeds = parse_list<std::uint64_t>(key, value);
  } else if (key == "variant") {
    cfg.variant = variant_from_name(value);
  } else if (key == "mode") {
    cfg.mode = mode_from_name(value);
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "transcript") {
    cfg.transcript_path = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);

  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_line(cfg, key, value);
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               err.what());
    }
  }
  return cfg;
}

PartitionSpec partition_spec(const ExperimentConfig& cfg, std::uint64_t seed) {
  PartitionSpec spec;
  spec.mode = cfg.partition_mode;
  spec.classes_per_agent = cfg.classes_per_agent;
  spec.alpha = cfg.alpha;
  spec.num_agents = cfg.num_agents;
  spec.test_fraction = cfg.test_fraction;
  spec.seed = seed;
  return spec;
}

}  // namespace sohip
