"""Division-relative entanglement and decoupling for quadratic
continuous-variable systems (xxpp ordering, hbar = 1, vacuum covariance I/2)."""

from .errors import BipartitionError, ConfigError, NumericalFailure, PhysicsError
from .phase_space import (
    DivisionSpec,
    ModeSystem,
    SymplecticTransform,
    classify_division,
    extend_point_transform,
    forward_moments,
    invert_moments,
    symplectic_form,
    two_body_transform,
    validate_symplectic,
)
from .hamiltonian import (
    QuadraticHamiltonian,
    build,
    harmonic_two_body,
    normal_modes,
    partition_blocks,
    transform_hamiltonian,
    trap,
)
from .gaussian_state import GaussianState, apply_transform, ground_state, product_state, reduce
from .entanglement import (
    compare_divisions,
    entanglement_entropy,
    entanglement_report,
    log_negativity,
    partial_transpose,
)
from .open_system import NoiseSpec, decoherence_time, evolve, shielded_division_search, trajectory

__version__ = "0.1.0"

__all__ = [
    "BipartitionError", "ConfigError", "NumericalFailure", "PhysicsError",
    "DivisionSpec", "ModeSystem", "SymplecticTransform", "classify_division",
    "extend_point_transform", "forward_moments", "invert_moments", "symplectic_form",
    "two_body_transform", "validate_symplectic",
    "QuadraticHamiltonian", "build", "harmonic_two_body", "normal_modes",
    "partition_blocks", "transform_hamiltonian", "trap",
    "GaussianState", "apply_transform", "ground_state", "product_state", "reduce",
    "compare_divisions", "entanglement_entropy", "entanglement_report",
    "log_negativity", "partial_transpose",
    "NoiseSpec", "decoherence_time", "evolve", "shielded_division_search", "trajectory",
]
