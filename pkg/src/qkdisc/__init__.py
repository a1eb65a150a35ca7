"""Automatic discovery of quantum kernels for anomaly detection.

The library encodes parameterized quantum circuits as integer genomes,
evaluates them with exact statevector simulation against kernel-theory
criteria, searches the genome space with meta-heuristic optimizers, and
assesses winners with a one-class SVM and ROC/AUC.
"""

from .genome import (
    GateSpec,
    KernelGenome,
    SearchSpace,
    identity_genome,
    load_genome,
    random_genome,
    save_genome,
)
from .kernels import gram, overlap_kernel, projected_kernel
from .ocsvm import decision_scores, roc_auc, train_ocsvm
from .optimizers import (
    bayesian_search,
    genetic_search,
    greedy_search,
    random_search,
    run_optimizer,
    sarsa_search,
)
from .pauli import PauliString, dla_closure

__all__ = [
    "GateSpec",
    "KernelGenome",
    "SearchSpace",
    "PauliString",
    "identity_genome",
    "random_genome",
    "load_genome",
    "save_genome",
    "overlap_kernel",
    "projected_kernel",
    "gram",
    "train_ocsvm",
    "decision_scores",
    "roc_auc",
    "dla_closure",
    "greedy_search",
    "genetic_search",
    "bayesian_search",
    "sarsa_search",
    "random_search",
    "run_optimizer",
]

__version__ = "0.1.0"
