import numpy as np
import pytest

from qkdisc import data as dm
from qkdisc.genome import KernelGenome, SearchSpace, random_genome

# dense single-qubit Paulis, used by the matrix oracles
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATS = (I2, SX, SY, SZ)


def pauli_on(n: int, alpha: int, qubit: int) -> np.ndarray:
    """sigma_alpha acting on `qubit` in an n-qubit register (qubit 0 = LSB)."""
    mats = [I2] * n
    mats[n - 1 - qubit] = PAULI_MATS[alpha]
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_word_matrix(word) -> np.ndarray:
    """Dense matrix of a PauliString (global phase chosen per-qubit Y/Z/X)."""
    out = np.eye(1, dtype=complex)
    for qubit in reversed(range(word.n)):
        x = (word.x_mask >> qubit) & 1
        z = (word.z_mask >> qubit) & 1
        out = np.kron(out, PAULI_MATS[{(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}[x, z]])
    return out


def random_valid_genome(rng: np.random.Generator, n=None, m=None, d=None,
                        b=None) -> KernelGenome:
    space = SearchSpace(
        n=n if n is not None else int(rng.integers(2, 5)),
        m=m if m is not None else int(rng.integers(1, 9)),
        d=d if d is not None else int(rng.integers(1, 6)),
        b=b if b is not None else int(rng.integers(1, 11)),
    )
    return random_genome(space, rng)


def make_blob_dataset(seed: int, shift: float = 2.0, n_sm: int = 6000,
                      n_bsm: int = 4000, dim: int = 4) -> dm.LabeledDataset:
    """Gaussian SM blob at the origin vs a mean-shifted BSM blob."""
    rng = np.random.default_rng(seed)
    sm = rng.normal(0.0, 1.0, size=(n_sm, dim))
    bsm = rng.normal(shift, 1.0, size=(n_bsm, dim))
    labels = np.r_[np.full(n_sm, dm.SM), np.full(n_bsm, dm.BSM)].astype(np.int64)
    return dm.LabeledDataset(np.vstack([sm, bsm]), labels, dim // 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
