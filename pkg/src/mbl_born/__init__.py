"""Many-body-localized hidden Born machine.

Basis convention used throughout: site 0 is the most significant bit of a
basis index and bit value 0 means spin up (S^z = +1/2).
"""

from .born import Partition, born_distribution, embed_pattern, partial_trace_hidden, visible_distribution
from .objectives import KernelSpec, classical_fidelity, gram_matrix, mmd_exact
from .spin import ChainSpec, build_xxz, total_hamiltonian
from .trainer import DriveConfig, TrainConfig, TrainingTrace, train, train_rdbm

__all__ = [
    "ChainSpec",
    "DriveConfig",
    "KernelSpec",
    "Partition",
    "TrainConfig",
    "TrainingTrace",
    "born_distribution",
    "build_xxz",
    "classical_fidelity",
    "embed_pattern",
    "gram_matrix",
    "mmd_exact",
    "partial_trace_hidden",
    "total_hamiltonian",
    "train",
    "train_rdbm",
    "visible_distribution",
]
