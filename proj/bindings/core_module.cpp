#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sohip/federation.hpp"
#include "sohip/runner.hpp"

namespace py = pybind11;

namespace {

std::vector<double> vector_to_list(const sohip::Vector& v) { return v.data; }

sohip::Vector list_to_vector(const std::vector<double>& v) {
  sohip::Vector out(v.size());
  out.data = v;
  return out;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& raw) {
  return py::bytes(reinterpret_cast<const char*>(raw.data()), raw.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Memory-centric collaborative learning simulator (C++ core)";

  py::enum_<sohip::Variant>(m, "Variant")
      .value("FULL", sohip::Variant::kFull)
      .value("NO_SHORT_GATE", sohip::Variant::kNoShortGate)
      .value("NO_CONSOLIDATION", sohip::Variant::kNoConsolidation)
      .value("NO_COLLECTIVE_FUSION", sohip::Variant::kNoCollectiveFusion)
      .value("NO_MEMORY", sohip::Variant::kNoMemory);

  py::enum_<sohip::RunMode>(m, "RunMode")
      .value("SOHIP", sohip::RunMode::kSohip)
      .value("STANDALONE", sohip::RunMode::kStandalone);

  py::enum_<sohip::PartitionMode>(m, "PartitionMode")
      .value("PATHOLOGICAL", sohip::PartitionMode::kPathological)
      .value("DIRICHLET", sohip::PartitionMode::kDirichlet);

  py::class_<sohip::Dataset>(m, "Dataset")
      .def_property_readonly("size", &sohip::Dataset::size)
      .def_property_readonly("feature_dim", &sohip::Dataset::feature_dim)
      .def_readonly("num_classes", &sohip::Dataset::num_classes)
      .def_readonly("name", &sohip::Dataset::name)
      .def_readonly("labels", &sohip::Dataset::labels)
      .def("feature_row", [](const sohip::Dataset& ds, std::size_t row) {
        if (row >= ds.size()) throw py::index_error();
        return std::vector<double>(ds.features.row(row),
                                   ds.features.row(row) + ds.feature_dim());
      });

  py::class_<sohip::AgentShard>(m, "AgentShard")
      .def_readonly("agent_id", &sohip::AgentShard::agent_id)
      .def_readonly("train", &sohip::AgentShard::train)
      .def_readonly("test", &sohip::AgentShard::test)
      .def_property_readonly("class_set", [](const sohip::AgentShard& s) {
        return std::vector<int>(s.class_set.begin(), s.class_set.end());
      });

  py::class_<sohip::SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("num_classes", &sohip::SyntheticSpec::num_classes)
      .def_readwrite("feature_dim", &sohip::SyntheticSpec::feature_dim)
      .def_readwrite("per_class", &sohip::SyntheticSpec::per_class)
      .def_readwrite("spread", &sohip::SyntheticSpec::spread);

  py::class_<sohip::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("csv_path", &sohip::ExperimentConfig::csv_path)
      .def_readwrite("synthetic", &sohip::ExperimentConfig::synthetic)
      .def_readwrite("partition_mode", &sohip::ExperimentConfig::partition_mode)
      .def_readwrite("classes_per_agent", &sohip::ExperimentConfig::classes_per_agent)
      .def_readwrite("alpha", &sohip::ExperimentConfig::alpha)
      .def_readwrite("test_fraction", &sohip::ExperimentConfig::test_fraction)
      .def_readwrite("num_agents", &sohip::ExperimentConfig::num_agents)
      .def_readwrite("participation", &sohip::ExperimentConfig::participation)
      .def_readwrite("rounds", &sohip::ExperimentConfig::rounds)
      .def_readwrite("mem_dim", &sohip::ExperimentConfig::mem_dim)
      .def_readwrite("feature_dims", &sohip::ExperimentConfig::feature_dims)
      .def_readwrite("batch_size", &sohip::ExperimentConfig::batch_size)
      .def_readwrite("local_epochs", &sohip::ExperimentConfig::local_epochs)
      .def_readwrite("lr", &sohip::ExperimentConfig::lr)
      .def_readwrite("eval_interval", &sohip::ExperimentConfig::eval_interval)
      .def_readwrite("seeds", &sohip::ExperimentConfig::seeds)
      .def_readwrite("variant", &sohip::ExperimentConfig::variant)
      .def_readwrite("mode", &sohip::ExperimentConfig::mode)
      .def_readwrite("output_dir", &sohip::ExperimentConfig::output_dir)
      .def_readwrite("transcript_path", &sohip::ExperimentConfig::transcript_path);

  py::class_<sohip::EvalRecord>(m, "EvalRecord")
      .def_readonly("round", &sohip::EvalRecord::round)
      .def_readonly("mean_test_acc", &sohip::EvalRecord::mean_test_acc)
      .def_readonly("mean_train_loss", &sohip::EvalRecord::mean_train_loss)
      .def_readonly("participants", &sohip::EvalRecord::participants)
      .def_readonly("uplink_bytes", &sohip::EvalRecord::uplink_bytes);

  py::class_<sohip::MetricsLog>(m, "MetricsLog")
      .def_readonly("evals", &sohip::MetricsLog::evals)
      .def_readonly("round_train_loss", &sohip::MetricsLog::round_train_loss)
      .def_readonly("final_agent_acc", &sohip::MetricsLog::final_agent_acc)
      .def_readonly("message_count", &sohip::MetricsLog::message_count)
      .def_readonly("total_message_bytes", &sohip::MetricsLog::total_message_bytes)
      .def_property_readonly("final_collective", [](const sohip::MetricsLog& log) {
        return vector_to_list(log.final_collective);
      });

  py::class_<sohip::SeedSummary>(m, "SeedSummary")
      .def_readonly("seed", &sohip::SeedSummary::seed)
      .def_readonly("final_acc", &sohip::SeedSummary::final_acc)
      .def_readonly("final_train_loss", &sohip::SeedSummary::final_train_loss);

  py::class_<sohip::RunOutput>(m, "RunOutput")
      .def_readonly("summaries", &sohip::RunOutput::summaries)
      .def_readonly("files_written", &sohip::RunOutput::files_written)
      .def_readonly("per_seed", &sohip::RunOutput::per_seed);

  py::class_<sohip::SweepRow>(m, "SweepRow")
      .def_readonly("value", &sohip::SweepRow::value)
      .def_readonly("mean_final_acc", &sohip::SweepRow::mean_final_acc)
      .def_readonly("std_final_acc", &sohip::SweepRow::std_final_acc);

  m.def(
      "generate_synthetic",
      [](std::size_t num_classes, std::size_t feature_dim, std::size_t per_class,
         double spread, std::uint64_t seed) {
        sohip::Rng rng =
            sohip::Rng::stream(seed, 0, 0, sohip::StreamPurpose::kDataGen);
        return sohip::generate_synthetic(rng, num_classes, feature_dim,
                                         per_class, spread);
      },
      py::arg("num_classes"), py::arg("feature_dim"), py::arg("per_class"),
      py::arg("spread"), py::arg("seed") = 0);

  m.def("load_csv", &sohip::load_csv, py::arg("path"));

  m.def(
      "partition_pathological",
      [](const sohip::Dataset& ds, std::size_t num_agents,
         std::size_t classes_per_agent, double test_fraction, std::uint64_t seed) {
        sohip::PartitionSpec spec;
        spec.mode = sohip::PartitionMode::kPathological;
        spec.num_agents = num_agents;
        spec.classes_per_agent = classes_per_agent;
        spec.test_fraction = test_fraction;
        spec.seed = seed;
        return sohip::partition_pathological(ds, spec);
      },
      py::arg("dataset"), py::arg("num_agents"), py::arg("classes_per_agent"),
      py::arg("test_fraction") = 0.2, py::arg("seed") = 0);

  m.def(
      "partition_dirichlet",
      [](const sohip::Dataset& ds, std::size_t num_agents, double alpha,
         double test_fraction, std::uint64_t seed) {
        sohip::PartitionSpec spec;
        spec.mode = sohip::PartitionMode::kDirichlet;
        spec.num_agents = num_agents;
        spec.alpha = alpha;
        spec.test_fraction = test_fraction;
        spec.seed = seed;
        return sohip::partition_dirichlet(ds, spec);
      },
      py::arg("dataset"), py::arg("num_agents"), py::arg("alpha"),
      py::arg("test_fraction") = 0.2, py::arg("seed") = 0);

  m.def(
      "run_single",
      [](const sohip::ExperimentConfig& cfg, std::uint64_t seed) {
        const sohip::Dataset dataset = sohip::build_dataset(cfg, seed);
        const auto shards = sohip::build_shards(cfg, dataset, seed);
        return sohip::run_experiment(cfg, shards, seed);
      },
      py::arg("config"), py::arg("seed"),
      "One experiment for one seed, without writing files");

  m.def("run", &sohip::run, py::arg("config"),
        "All seeds, writing per-seed metrics and summary.csv");

  m.def("sweep", &sohip::sweep, py::arg("axis"), py::arg("values"),
        py::arg("config"));

  m.def("validate", &sohip::validate, py::arg("config"),
        "List of violations; empty when the config is valid");

  m.def(
      "sigmoid",
      [](const std::vector<double>& x) {
        return vector_to_list(sohip::sigmoid(list_to_vector(x)));
      },
      py::arg("x"));

  m.def(
      "encode_upload",
      [](std::uint32_t round, std::uint32_t agent_id,
         const std::vector<double>& payload) {
        return to_bytes(
            sohip::encode(sohip::make_upload(round, agent_id, list_to_vector(payload))));
      },
      py::arg("round"), py::arg("agent_id"), py::arg("payload"));

  m.def("decode_upload", [](const py::bytes& raw) {
    const auto msg = sohip::decode_upload(from_bytes(raw));
    return py::make_tuple(msg.round, msg.agent_id, msg.payload);
  });

  m.def(
      "encode_broadcast",
      [](std::uint32_t round, const std::vector<double>& payload) {
        return to_bytes(sohip::encode(sohip::make_broadcast(round, list_to_vector(payload))));
      },
      py::arg("round"), py::arg("payload"));

  m.def("decode_broadcast", [](const py::bytes& raw) {
    const auto msg = sohip::decode_broadcast(from_bytes(raw));
    return py::make_tuple(msg.round, msg.payload);
  });

  m.def("upload_wire_size", [](std::size_t mem_dim) {
    return sohip::upload_wire_size(mem_dim);
  });
  m.def("broadcast_wire_size", [](std::size_t mem_dim) {
    return sohip::broadcast_wire_size(mem_dim);
  });
}
