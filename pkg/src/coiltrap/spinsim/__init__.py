"""Exact state-vector simulation of the emulated spin models."""
from .state import MAX_QUBITS, ResourceError, SpinState
from .hamiltonian import HamiltonianSpec
from .dynamics import (
    EXACT, Observables, Trotter, evolve, gamma_sweep, ground_state, normalized_pattern,
    observables, two_spin_phase,
)
from .cluster import (
    ClusterResult, FalloffFit, correlation_falloff_check, ideal_cluster_state,
    make_cluster_state, nearest_neighbor_mask,
)

__all__ = [
    "MAX_QUBITS", "ResourceError", "SpinState", "HamiltonianSpec", "EXACT", "Observables",
    "Trotter", "evolve", "gamma_sweep", "ground_state", "normalized_pattern", "observables",
    "two_spin_phase", "ClusterResult", "FalloffFit", "correlation_falloff_check",
    "ideal_cluster_state", "make_cluster_state", "nearest_neighbor_mask",
]
