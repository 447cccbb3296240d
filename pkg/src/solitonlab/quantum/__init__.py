"""Full quantum evolution of the spin chain.

Two engines over the same observable contract: a TEBD matrix-product-state
engine with second-order Trotter gates and Schmidt truncation (``mps``), and
a dense Lanczos/Krylov propagator for small chains that serves as the
accuracy oracle (``dense``).
"""

from .config import EvolutionConfig
from .gates import trotter_gates, bond_hamiltonian, full_hamiltonian_dense
from .mps import MPS, mps_from_bloch, tebd_evolve, entropy_profile
from .dense import (
    DenseState,
    dense_from_bloch,
    krylov_exact_evolve,
    ground_state_reference,
)

__all__ = [
    "EvolutionConfig",
    "trotter_gates",
    "bond_hamiltonian",
    "full_hamiltonian_dense",
    "MPS",
    "mps_from_bloch",
    "tebd_evolve",
    "entropy_profile",
    "DenseState",
    "dense_from_bloch",
    "krylov_exact_evolve",
    "ground_state_reference",
]
