"""Bit-level Pauli-string arithmetic and dynamical Lie algebra closure.

An n-qubit Pauli word is stored as a pair of n-bit integer masks
(x_mask, z_mask).  Qubit i carries X iff bit i is set in x_mask only,
Z iff set in z_mask only, Y iff set in both, and identity iff in neither.
Phases are deliberately not tracked: the DLA rank counts distinct Pauli
words, and every commutator of two Pauli words is a single Pauli word
times a scalar, so scalars never change the span dimension.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

__all__ = [
    "PauliString",
    "DlaClosureResult",
    "anticommutes",
    "pauli_product",
    "dla_closure",
    "default_rank_threshold",
]

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}


class PauliDimensionError(ValueError):
    """Raised when two Pauli strings act on different qubit counts."""


@dataclass(frozen=True, order=True)
class PauliString:
    """n-qubit Pauli word in symplectic (x_mask, z_mask) form."""

    n: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"qubit count must be positive, got {self.n}")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask has bits outside the qubit range")

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a text label like "XZI" (qubit 0 leftmost)."""
        if not label:
            raise ValueError("empty Pauli label")
        x_mask = z_mask = 0
        for i, ch in enumerate(label):
            try:
                x, z = _CHAR_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {label!r}") from None
            x_mask |= x << i
            z_mask |= z << i
        return cls(len(label), x_mask, z_mask)

    def to_label(self) -> str:
        return "".join(
            _BITS_TO_CHAR[(self.x_mask >> i) & 1, (self.z_mask >> i) & 1]
            for i in range(self.n)
        )

    def __str__(self) -> str:
        return self.to_label()


@dataclass(frozen=True)
class DlaClosureResult:
    """Fixed point (or truncation) of repeated commutation of Pauli words."""

    basis: tuple[PauliString, ...]
    rank: int
    truncated: bool


def _check_same_n(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise PauliDimensionError(f"qubit counts differ: {a.n} vs {b.n}")


def anticommutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic form of a and b is odd, i.e. [a, b] != 0."""
    _check_same_n(a, b)
    overlap = (a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)
    return bin(overlap).count("1") % 2 == 1


def pauli_product(a: PauliString, b: PauliString) -> PauliString:
    """Pauli word of the product a*b with the scalar phase discarded."""
    _check_same_n(a, b)
    return PauliString(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask)


def default_rank_threshold(n: int) -> int:
    """Exact-closure threshold 4^n - 1, the count of non-identity words."""
    if n > 6:
        raise ValueError(
            "default threshold is exponential; supply an explicit threshold for n > 6"
        )
    return 4**n - 1


def dla_closure(generators, threshold: int | None = None) -> DlaClosureResult:
    """Close a set of Pauli words under commutation, up to a rank threshold.

    Seeds a worklist with the generators (identity excluded) and adds the
    product word of every anticommuting pair until no new word appears.
    Stops early with truncated=True once the basis reaches `threshold`.
    The returned basis is sorted by (x_mask, z_mask) for determinism.
    """
    gens = [g for g in generators if not g.is_identity]
    if not gens:
        return DlaClosureResult(basis=(), rank=0, truncated=False)
    n = gens[0].n
    for g in gens:
        if g.n != n:
            raise PauliDimensionError("generators act on different qubit counts")
    if threshold is None:
        threshold = default_rank_threshold(n)
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")

    basis: set[PauliString] = set()
    queue: deque[PauliString] = deque()
    for g in gens:
        if g not in basis:
            basis.add(g)
            queue.append(g)
    members: list[PauliString] = list(basis)

    truncated = len(basis) >= threshold
    while queue and not truncated:
        a = queue.popleft()
        # pair `a` against every current member, including itself (a no-op)
        for b in list(members):
            if anticommutes(a, b):
                c = pauli_product(a, b)
                if c not in basis and not c.is_identity:
                    basis.add(c)
                    members.append(c)
                    queue.append(c)
                    if len(basis) >= threshold:
                        truncated = True
                        break

    ordered = tuple(sorted(basis, key=lambda p: (p.x_mask, p.z_mask)))
    return DlaClosureResult(basis=ordered, rank=len(ordered), truncated=truncated)
