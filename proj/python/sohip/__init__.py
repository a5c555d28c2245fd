"""Memory-centric collaborative learning simulator.

Thin wrapper over the C++ core. Agents hold private data and private
heterogeneous models; the only cross-agent traffic is a fixed-size
long-term memory vector per round.
"""

from sohip._core import (
    AgentShard,
    Dataset,
    EvalRecord,
    ExperimentConfig,
    MetricsLog,
    PartitionMode,
    RunMode,
    RunOutput,
    SeedSummary,
    SweepRow,
    SyntheticSpec,
    Variant,
    broadcast_wire_size,
    decode_broadcast,
    decode_upload,
    encode_broadcast,
    encode_upload,
    generate_synthetic,
    load_csv,
    partition_dirichlet,
    partition_pathological,
    run,
    run_single,
    sigmoid,
    sweep,
    upload_wire_size,
    validate,
)

__all__ = [
    "AgentShard",
    "Dataset",
    "EvalRecord",
    "ExperimentConfig",
    "MetricsLog",
    "PartitionMode",
    "RunMode",
    "RunOutput",
    "SeedSummary",
    "SweepRow",
    "SyntheticSpec",
    "Variant",
    "broadcast_wire_size",
    "decode_broadcast",
    "decode_upload",
    "encode_broadcast",
    "encode_upload",
    "generate_synthetic",
    "load_csv",
    "partition_dirichlet",
    "partition_pathological",
    "run",
    "run_single",
    "sigmoid",
    "sweep",
    "upload_wire_size",
    "validate",
]
