"""Discrete HMM toolkit: constrained swarm training, EM baseline, comparison harness."""

from .model import (
    HmmModel,
    InvalidModelError,
    ObservationSequence,
    random_model,
    sample_sequence,
    validate_model,
)
from .likelihood import (
    brute_force_log_likelihood,
    forward_log_likelihood,
    viterbi_decode,
)
from .baumwelch import DegenerateInputError, baum_welch_step, baum_welch_train
from .pso import (
    FitnessTrace,
    Particle,
    SwarmConfig,
    decode,
    encode,
    fitness,
    position_update,
    pso_train,
    remap_repair,
    renormalize,
    velocity_resync,
    velocity_update,
)
from .harness import (
    ComparisonRow,
    DatasetSpec,
    ExperimentReport,
    emit_report,
    emit_timings,
    generate_datasets,
    run_comparison,
)

__version__ = "0.1.0"

__all__ = [
    "HmmModel",
    "InvalidModelError",
    "ObservationSequence",
    "random_model",
    "sample_sequence",
    "validate_model",
    "forward_log_likelihood",
    "brute_force_log_likelihood",
    "viterbi_decode",
    "DegenerateInputError",
    "baum_welch_step",
    "baum_welch_train",
    "SwarmConfig",
    "Particle",
    "FitnessTrace",
    "encode",
    "decode",
    "velocity_update",
    "position_update",
    "remap_repair",
    "renormalize",
    "velocity_resync",
    "fitness",
    "pso_train",
    "DatasetSpec",
    "ComparisonRow",
    "ExperimentReport",
    "generate_datasets",
    "run_comparison",
    "emit_report",
    "emit_timings",
]
