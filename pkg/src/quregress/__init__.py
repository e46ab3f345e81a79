"""Statevector simulation, training and architecture search for quantum circuit regressors."""

__version__ = "0.1.0"

from .benchmarks import RegressionDataset, generate_dataset
from .circuits import AnsatzFamily, Chromosome, Family, build_ansatz, decode_chromosome
from .complexity import ComplexityProfile, compute_profile
from .ga import GAConfig, GAResult, run_ga
from .sim import CircuitSpec, GateKind, GateOp, run_circuit
from .training import Metrics, TrainConfig, TrainResult, train

__all__ = [
    "AnsatzFamily", "Chromosome", "CircuitSpec", "ComplexityProfile", "Family", "GAConfig",
    "GAResult", "GateKind", "GateOp", "Metrics", "RegressionDataset", "TrainConfig",
    "TrainResult", "build_ansatz", "compute_profile", "decode_chromosome", "generate_dataset",
    "run_circuit", "run_ga", "train",
]
