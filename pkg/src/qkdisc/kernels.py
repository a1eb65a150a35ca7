"""Kernel evaluations and Gram-matrix assembly.

The overlap kernel is |<psi_x'|psi_x>|^2 = tr[rho_x rho_x'] for pure
states.  The projected kernel is tr[rho~_x rho~_x'] of reduced density
matrices over the genome's measured qubits; the swap test over the
measured subset estimates the same quantity as 2 p0 - 1 and is realized
analytically here.
"""

from __future__ import annotations

import numpy as np

from .genome import KernelGenome
from .simulator import encode, reduced_density

__all__ = [
    "overlap_kernel",
    "projected_kernel",
    "gram",
    "save_gram_csv",
]


def overlap_kernel(genome: KernelGenome, x, x_prime) -> float:
    """|<psi_x'|psi_x>|^2 in [0, 1]."""
    psi = encode(genome, np.asarray(x))
    phi = encode(genome, np.asarray(x_prime))
    return float(np.abs(np.vdot(phi, psi)) ** 2)


def projected_kernel(genome: KernelGenome, x, x_prime) -> float:
    """tr[rho~_x rho~_x'] over the genome's measured qubits."""
    rho = reduced_density(encode(genome, np.asarray(x)), genome.measure_mask)
    rho_p = reduced_density(encode(genome, np.asarray(x_prime)), genome.measure_mask)
    return float(np.trace(rho @ rho_p).real)


def _feature_vectors(genome: KernelGenome, X: np.ndarray,
                     projected: bool) -> np.ndarray:
    """Per-sample vectors whose pairwise |inner|^2 / inner give the kernel.

    Overlap case: rows are statevectors (kernel = |<row_i, row_j>|^2).
    Projected case: rows are vectorized reduced density matrices
    (kernel = Re <row_i, row_j>, the Hilbert-Schmidt inner product).
    """
    rows = []
    for x in X:
        state = encode(genome, x)
        if projected:
            rows.append(reduced_density(state, genome.measure_mask).ravel())
        else:
            rows.append(state)
    return np.asarray(rows)


def gram(genome: KernelGenome, X, X_opt=None, projected: bool = False) -> np.ndarray:
    """Gram matrix of kernel values over a dataset (or a pair of datasets).

    Square case (X_opt is None): statevectors are encoded once per sample
    and the upper triangle is mirrored.  The diagonal is computed exactly,
    not assumed 1: projected kernels give kappa(x, x) = purity <= 1.
    Rectangular case: rows index X, columns index X_opt.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        other = 0 if X_opt is None else len(np.asarray(X_opt))
        return np.zeros((0, other))
    V = _feature_vectors(genome, X, projected)
    if X_opt is None:
        inner = V @ V.conj().T
        K = inner.real if projected else np.abs(inner) ** 2
        # mirror the upper triangle so symmetry is exact
        K = np.triu(K) + np.triu(K, 1).T
        return K
    X_opt = np.asarray(X_opt, dtype=np.float64)
    if X_opt.shape[1:] != X.shape[1:]:
        raise ValueError("datasets have mismatched feature dimensions")
    W = _feature_vectors(genome, X_opt, projected)
    inner = V @ W.conj().T
    return inner.real if projected else np.abs(inner) ** 2


def save_gram_csv(K: np.ndarray, path) -> None:
    """Row-major CSV at full precision, for offline analysis."""
    np.savetxt(path, np.atleast_2d(K), delimiter=",", fmt="%.17e")
