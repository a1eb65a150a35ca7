"""Integer genome encoding of parameterized quantum kernels.

A kernel on n qubits with m gates is a flat vector of 6m + n naturals:
m gate tuples (alpha, beta, p, q, k, j) followed by n measurement bits.
Gate tuples index Pauli generators (alpha, beta), qubit pair (p, q),
feature (k), and bandwidth slot (j).  The second qubit is stored as a
slot in {0..n-2} that skips p, so every tuple is valid by construction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GateSpec",
    "SearchSpace",
    "KernelGenome",
    "GenomeValidationError",
    "validate",
    "encode_flat",
    "decode_flat",
    "space_cardinality",
    "identity_genome",
    "enumerate_cell_values",
    "random_genome",
    "mutate",
    "crossover",
    "default_bandwidths",
    "genome_to_text",
    "genome_from_text",
    "save_genome",
    "load_genome",
]


class GenomeValidationError(ValueError):
    """Raised when an operation receives a genome violating its invariants."""


@dataclass(frozen=True)
class GateSpec:
    """One two-qubit Pauli rotation gate, as a tuple of bounded indices."""

    alpha: int  # Pauli on first qubit, 0..3
    beta: int   # Pauli on second qubit, 0..3
    p: int      # first qubit, 0..n-1
    q: int      # second-qubit slot, 0..n-2; realized qubit skips p
    k: int      # feature index, 0..d-1
    j: int      # bandwidth slot, 0..b-1

    def second_qubit(self) -> int:
        """Realized second qubit q' = q if q < p else q + 1 (never equal to p)."""
        return self.q if self.q < self.p else self.q + 1

    def as_tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.alpha, self.beta, self.p, self.q, self.k, self.j)


@dataclass(frozen=True)
class SearchSpace:
    """Bounds (n, m, d, b) defining the genome space."""

    n: int  # qubits
    m: int  # gates
    d: int  # features
    b: int  # bandwidth slots

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("two-qubit gates need n >= 2 distinct qubits")
        if self.m < 0 or self.d < 1 or self.b < 1:
            raise ValueError(f"invalid space bounds {self!r}")

    @property
    def flat_length(self) -> int:
        return 6 * self.m + self.n

    def cell_bounds(self, cell_index: int) -> int:
        """Number of legal values at a flat-encoding cell."""
        if not 0 <= cell_index < self.flat_length:
            raise IndexError(f"cell index {cell_index} out of range")
        if cell_index >= 6 * self.m:
            return 2  # measurement bit
        return (4, 4, self.n, self.n - 1, self.d, self.b)[cell_index % 6]


def default_bandwidths(b: int) -> tuple[float, ...]:
    """The common choice beta_i = i/b for i = 1..b (last entry 1)."""
    return tuple(i / b for i in range(1, b + 1))


@dataclass(frozen=True)
class KernelGenome:
    """A point in the kernel search space.

    `measure_mask` is an n-bit integer with bit i set iff qubit i is
    measured (projected kernels trace out the unset qubits).
    """

    n: int
    d: int
    gates: tuple[GateSpec, ...]
    measure_mask: int
    bandwidths: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.gates)

    @property
    def b(self) -> int:
        return len(self.bandwidths)

    @property
    def space(self) -> SearchSpace:
        return SearchSpace(self.n, self.m, self.d, self.b)

    def hash(self) -> str:
        """Stable content hash of the canonical text form."""
        return hashlib.sha256(genome_to_text(self).encode()).hexdigest()


def validate(genome: KernelGenome) -> list[str]:
    """Return the complete list of invariant violations (empty on success)."""
    errors: list[str] = []
    n, d, b = genome.n, genome.d, genome.b
    if n < 2:
        errors.append(f"qubit count {n} < 2")
    if d < 1:
        errors.append(f"feature count {d} < 1")
    if b < 1:
        errors.append("empty bandwidth table")
    else:
        if any(not 0 < bw <= 1 for bw in genome.bandwidths):
            errors.append("bandwidths must lie in (0, 1]")
        if any(x >= y for x, y in zip(genome.bandwidths, genome.bandwidths[1:])):
            errors.append("bandwidths must be strictly increasing")
        if genome.bandwidths[-1] != 1.0:
            errors.append("last bandwidth != 1")
    full = (1 << max(n, 1)) - 1
    if genome.measure_mask == 0:
        errors.append("empty measurement mask")
    elif genome.measure_mask & ~full:
        errors.append("measurement mask has bits outside the qubit range")
    for g_idx, g in enumerate(genome.gates):
        for name, val, hi in (
            ("alpha", g.alpha, 4), ("beta", g.beta, 4), ("p", g.p, n),
            ("q", g.q, n - 1), ("k", g.k, d), ("j", g.j, b),
        ):
            if not 0 <= val < hi:
                errors.append(f"gate {g_idx}: {name}={val} out of range [0, {hi})")
    return errors


def _require_valid(genome: KernelGenome) -> None:
    errors = validate(genome)
    if errors:
        raise GenomeValidationError("; ".join(errors))


def encode_flat(genome: KernelGenome) -> list[int]:
    """Flat vector of 6m + n naturals: gate tuples then measurement bits."""
    _require_valid(genome)
    flat: list[int] = []
    for g in genome.gates:
        flat.extend(g.as_tuple())
    flat.extend((genome.measure_mask >> i) & 1 for i in range(genome.n))
    return flat


def decode_flat(flat, space: SearchSpace,
                bandwidths: tuple[float, ...] | None = None) -> KernelGenome:
    """Inverse of encode_flat; rejects out-of-range cells."""
    flat = list(flat)
    if len(flat) != space.flat_length:
        raise GenomeValidationError(
            f"flat length {len(flat)} != 6m+n = {space.flat_length}")
    for i, v in enumerate(flat):
        if not 0 <= v < space.cell_bounds(i):
            raise GenomeValidationError(f"cell {i} value {v} out of range")
    gates = tuple(
        GateSpec(*flat[6 * g: 6 * g + 6]) for g in range(space.m)
    )
    mask = 0
    for i, bit in enumerate(flat[6 * space.m:]):
        mask |= bit << i
    if bandwidths is None:
        bandwidths = default_bandwidths(space.b)
    genome = KernelGenome(space.n, space.d, gates, mask, tuple(bandwidths))
    _require_valid(genome)
    return genome


def space_cardinality(space: SearchSpace) -> int:
    """Exact size of the genome space: (16 n (n-1) d b)^m * 2^n."""
    per_gate = 16 * space.n * (space.n - 1) * space.d * space.b
    return per_gate**space.m * 2**space.n


def identity_genome(n: int, m: int, d: int, b: int) -> KernelGenome:
    """All-identity-generator genome: the all-ones Gram matrix."""
    space = SearchSpace(n, m, d, b)
    gates = tuple(GateSpec(0, 0, 0, 0, 0, 0) for _ in range(space.m))
    return KernelGenome(n, d, gates, (1 << n) - 1, default_bandwidths(b))


def _with_flat_cell(genome: KernelGenome, cell_index: int, value: int) -> KernelGenome:
    flat = encode_flat(genome)
    flat[cell_index] = value
    return decode_flat(flat, genome.space, genome.bandwidths)


def enumerate_cell_values(genome: KernelGenome, cell_index: int) -> list[KernelGenome]:
    """All valid genomes differing from `genome` only at one flat cell.

    The input genome itself is included.  Measurement-bit cells omit any
    value that would empty the mask.
    """
    _require_valid(genome)
    space = genome.space
    out: list[KernelGenome] = []
    for value in range(space.cell_bounds(cell_index)):
        try:
            out.append(_with_flat_cell(genome, cell_index, value))
        except GenomeValidationError:
            continue  # e.g. clearing the last measurement bit
    return out


def random_genome(space: SearchSpace, rng: np.random.Generator,
                  bandwidths: tuple[float, ...] | None = None) -> KernelGenome:
    """Uniform sample over valid genomes (mask resampled until nonzero)."""
    if bandwidths is None:
        bandwidths = default_bandwidths(space.b)
    gates = tuple(
        GateSpec(
            int(rng.integers(4)), int(rng.integers(4)),
            int(rng.integers(space.n)), int(rng.integers(space.n - 1)),
            int(rng.integers(space.d)), int(rng.integers(space.b)),
        )
        for _ in range(space.m)
    )
    mask = 0
    while mask == 0:
        mask = int(rng.integers(1 << space.n))
    return KernelGenome(space.n, space.d, gates, mask, tuple(bandwidths))


def mutate(genome: KernelGenome, rate: float, rng: np.random.Generator) -> KernelGenome:
    """Resample each flat cell independently with probability `rate`."""
    _require_valid(genome)
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate {rate} outside [0, 1]")
    space = genome.space
    flat = encode_flat(genome)
    for i in range(len(flat)):
        if rng.random() < rate:
            flat[i] = int(rng.integers(space.cell_bounds(i)))
    # mask invariant: resample until at least one measurement bit survives
    while not any(flat[6 * space.m:]):
        for i in range(6 * space.m, len(flat)):
            flat[i] = int(rng.integers(2))
    return decode_flat(flat, space, genome.bandwidths)


def crossover(a: KernelGenome, b: KernelGenome, point: int) -> KernelGenome:
    """One-point crossover at a gate boundary: gates [0, point) from `a`,
    gates [point, m) and the measurement mask from `b`."""
    _require_valid(a)
    _require_valid(b)
    if a.space != b.space or a.bandwidths != b.bandwidths:
        raise GenomeValidationError("crossover parents live in different spaces")
    if not 0 <= point <= a.m:
        raise ValueError(f"crossover point {point} outside [0, {a.m}]")
    gates = a.gates[:point] + b.gates[point:]
    return KernelGenome(a.n, a.d, gates, b.measure_mask, a.bandwidths)


# ---------------------------------------------------------------------------
# Text format (.qkg): canonical field order for byte-stable hashing.
# ---------------------------------------------------------------------------

def genome_to_text(genome: KernelGenome) -> str:
    lines = [f"n {genome.n}", f"d {genome.d}"]
    lines.append("bandwidths " + " ".join(repr(bw) for bw in genome.bandwidths))
    for g in genome.gates:
        lines.append("gate " + " ".join(str(v) for v in g.as_tuple()))
    lines.append("mask " + "".join(
        str((genome.measure_mask >> i) & 1) for i in range(genome.n)))
    return "\n".join(lines) + "\n"


def genome_from_text(text: str) -> KernelGenome:
    n = d = None
    bandwidths: tuple[float, ...] | None = None
    gates: list[GateSpec] = []
    mask = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "n":
                n = int(rest)
            elif key == "d":
                d = int(rest)
            elif key == "bandwidths":
                bandwidths = tuple(float(t) for t in rest.split())
            elif key == "gate":
                vals = [int(t) for t in rest.split()]
                if len(vals) != 6:
                    raise ValueError(f"gate needs 6 fields, got {len(vals)}")
                gates.append(GateSpec(*vals))
            elif key == "mask":
                bits = rest.strip()
                if set(bits) - {"0", "1"}:
                    raise ValueError(f"bad mask string {bits!r}")
                mask = sum(1 << i for i, c in enumerate(bits) if c == "1")
            else:
                raise ValueError(f"unknown field {key!r}")
        except ValueError as exc:
            raise GenomeValidationError(f"line {lineno}: {exc}") from None
    if n is None or d is None or bandwidths is None or mask is None:
        raise GenomeValidationError("genome text missing required fields")
    genome = KernelGenome(n, d, tuple(gates), mask, bandwidths)
    _require_valid(genome)
    return genome


def save_genome(genome: KernelGenome, path) -> None:
    with open(path, "w") as fh:
        fh.write(genome_to_text(genome))


def load_genome(path) -> KernelGenome:
    with open(path) as fh:
        return genome_from_text(fh.read())
