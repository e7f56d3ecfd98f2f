"""Architecture search for distributed parameterized quantum circuits.

Builds random circuits that respect a multi-QPU topology (nonlocal CNOTs via
gate teleportation or state teleportation over quantum links), filters them
without training using an exact DAG path count and a Haar-divergence
expressibility score, and trains the survivors on ground-state energy tasks.
"""

from .circuits import Circuit, Gate, GenMeta, layered_ansatz
from .dag import CircuitDag, build_dag, count_paths
from .device import (
    DeviceGraph,
    QubitAssignment,
    default_device,
    load_device,
    sample_assignment,
)
from .expressibility import ExpressibilityEstimate, estimate_expressibility
from .generation import GenerationError, apply_teledata, generate, is_redundant
from .hamiltonians import (
    PauliHamiltonian,
    build_heisenberg,
    build_tfim,
    exact_ground_energy,
    load_hamiltonian,
)
from .pipeline import PipelineConfig, PipelineReport, run_pipeline
from .simulator import apply_circuit, apply_physical, expectation, zero_state
from .vcg import PositionSets, VcgState, derive_position_sets
from .vqe import QueryResult, TrainConfig, energy_and_gradient, train_query

__all__ = [
    "Circuit",
    "CircuitDag",
    "DeviceGraph",
    "ExpressibilityEstimate",
    "Gate",
    "GenMeta",
    "GenerationError",
    "PauliHamiltonian",
    "PipelineConfig",
    "PipelineReport",
    "PositionSets",
    "QubitAssignment",
    "QueryResult",
    "TrainConfig",
    "VcgState",
    "apply_circuit",
    "apply_physical",
    "apply_teledata",
    "build_dag",
    "build_heisenberg",
    "build_tfim",
    "count_paths",
    "default_device",
    "derive_position_sets",
    "energy_and_gradient",
    "estimate_expressibility",
    "exact_ground_energy",
    "expectation",
    "generate",
    "is_redundant",
    "layered_ansatz",
    "load_device",
    "load_hamiltonian",
    "run_pipeline",
    "sample_assignment",
    "train_query",
    "zero_state",
]

__version__ = "0.1.0"
