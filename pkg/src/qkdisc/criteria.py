"""Evaluation criteria for candidate kernels and the weighted composite cost.

Implemented criteria:
  - kernel-target alignment (plain and centered),
  - task-model alignment (fraction of target power in the top-k
    kernel eigendirections, estimated from the Gram matrix),
  - dynamical-Lie-algebra rank with threshold truncation,
  - expressivity as the t=2 frame-potential gap to the Haar value,
  - validation error of a one-class SVM on a held-out labeled split.

All criteria are nonnegative-or-bounded reals so they can enter a
weighted linear cost to be minimized.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, ocsvm
from .genome import KernelGenome
from .pauli import PauliString, dla_closure

__all__ = [
    "CriterionReport",
    "CompositeCost",
    "CriterionContext",
    "CriterionError",
    "kta",
    "centered_kta",
    "task_model_alignment",
    "dla_rank_criterion",
    "gate_generators",
    "expressivity_estimate",
    "haar_frame_potential",
    "validation_cost",
    "composite_cost",
    "CRITERION_NAMES",
]


class CriterionError(ValueError):
    pass


@dataclass(frozen=True)
class CriterionReport:
    name: str
    value: float
    auxiliary: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0


@dataclass(frozen=True)
class CompositeCost:
    weights: dict[str, float]
    reports: tuple[CriterionReport, ...]

    @property
    def cost(self) -> float:
        by_name = {r.name: r.value for r in self.reports}
        return sum(w * by_name[name] for name, w in self.weights.items())


# ---------------------------------------------------------------------------
# Alignment criteria
# ---------------------------------------------------------------------------

def kta(K: np.ndarray, y: np.ndarray) -> float:
    """Kernel-target alignment <K, yy^T>_F / (||K||_F ||yy^T||_F) in [-1, 1]."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise CriterionError(f"Gram must be square, got {K.shape}")
    if y.shape != (K.shape[0],):
        raise CriterionError("label vector length does not match Gram size")
    k_norm = np.linalg.norm(K)
    if k_norm < 1e-300:
        raise CriterionError("all-zero Gram matrix: alignment undefined")
    y_gram_norm = float(y @ y)  # ||yy^T||_F = y.y
    if y_gram_norm < 1e-300:
        raise CriterionError("all-zero label vector")
    return float((y @ K @ y) / (k_norm * y_gram_norm))


def centered_kta(K: np.ndarray, y: np.ndarray) -> float:
    """Alignment of the doubly-centered Gram with the centered label outer."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise CriterionError(f"Gram must be square, got {K.shape}")
    m = K.shape[0]
    H = np.eye(m) - np.full((m, m), 1.0 / m)
    Kc = H @ K @ H
    if np.linalg.norm(Kc) < 1e-12 * max(np.linalg.norm(K), 1.0):
        raise CriterionError("centered Gram is numerically zero")
    yc = H @ y
    Yc = np.outer(yc, yc)
    y_norm = np.linalg.norm(Yc)
    if y_norm < 1e-24 * max(float(y @ y), 1.0):
        raise CriterionError("centered labels are zero (constant labels)")
    return float(np.sum(Kc * Yc) / (np.linalg.norm(Kc) * y_norm))


def task_model_alignment(K: np.ndarray, y: np.ndarray, k: int) -> float:
    """Fraction of target power captured by the top-k Gram eigendirections.

    Eigenvalues are clipped at zero.  Within a degenerate eigenvalue
    group the projection of y onto the eigenspace is attributed
    uniformly across the group's members, making the result independent
    of the arbitrary eigenbasis choice.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise CriterionError(f"Gram must be square, got {K.shape}")
    m = K.shape[0]
    if not 1 <= k <= m:
        raise CriterionError(f"cutoff k = {k} outside [1, {m}]")
    eigvals, eigvecs = np.linalg.eigh((K + K.T) / 2.0)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]

    power = eigvals * (eigvecs.T @ y) ** 2
    # spread power uniformly inside degenerate groups
    scale = max(abs(eigvals[0]), 1.0)
    start = 0
    for stop in range(1, m + 1):
        if stop == m or abs(eigvals[stop] - eigvals[start]) > 1e-9 * scale:
            if stop - start > 1:
                power[start:stop] = power[start:stop].mean()
            start = stop
    total = power.sum()
    if total < 1e-300:
        raise CriterionError("target has zero power under this kernel")
    return float(power[:k].sum() / total)


# ---------------------------------------------------------------------------
# Expressivity criteria
# ---------------------------------------------------------------------------

def gate_generators(genome: KernelGenome) -> list[PauliString]:
    """Distinct Pauli generators of the genome's gates (identity gates skipped)."""
    seen: set[PauliString] = set()
    out: list[PauliString] = []
    for g in genome.gates:
        if g.alpha == 0 and g.beta == 0:
            continue
        x_mask = z_mask = 0
        for pauli_idx, qubit in ((g.alpha, g.p), (g.beta, g.second_qubit())):
            if pauli_idx in (1, 2):
                x_mask |= 1 << qubit
            if pauli_idx in (2, 3):
                z_mask |= 1 << qubit
        word = PauliString(genome.n, x_mask, z_mask)
        if word not in seen:
            seen.add(word)
            out.append(word)
    return out


def dla_rank_criterion(genome: KernelGenome, threshold: int | None = None) -> CriterionReport:
    """Rank of the dynamical Lie algebra spanned by the gate generators."""
    t0 = time.perf_counter()
    result = dla_closure(gate_generators(genome), threshold)
    return CriterionReport(
        name="dla_rank",
        value=float(result.rank),
        auxiliary={"truncated": float(result.truncated)},
        wall_time=time.perf_counter() - t0,
    )


def haar_frame_potential(n: int, t: int = 2) -> float:
    """Haar value of the t-th frame potential, t!(N-1)!/(N+t-1)! with N = 2^n."""
    N = 2**n
    value = 1.0
    for i in range(t):
        value *= (t - i) / (N + i)
    return value


def expressivity_estimate(genome: KernelGenome, sample_count: int,
                          seed: int) -> CriterionReport:
    """Monte Carlo t=2 frame-potential gap to the Haar ensemble (>= 0).

    Samples `sample_count` independent input pairs uniformly from
    (-pi, pi)^d and averages the squared overlap kernel; subtracting
    the Haar value 2/(N(N+1)) gives the squared deviation norm from a
    2-design at the ensemble level.
    """
    if sample_count < 2:
        raise CriterionError(f"need at least 2 samples, got {sample_count}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(-np.pi, np.pi, size=(sample_count, 2, genome.d))
    values = np.array([
        kernels.overlap_kernel(genome, pair[0], pair[1]) ** 2 for pair in pairs
    ])
    frame_potential = float(values.mean())
    haar = haar_frame_potential(genome.n)
    std_err = float(values.std(ddof=1) / np.sqrt(sample_count))
    return CriterionReport(
        name="expressivity",
        value=frame_potential - haar,
        auxiliary={"frame_potential": frame_potential, "haar_value": haar,
                   "std_error": std_err},
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Validation criterion
# ---------------------------------------------------------------------------

def validation_cost(genome: KernelGenome, train_X: np.ndarray,
                    val_X: np.ndarray, val_y: np.ndarray,
                    nu: float, projected: bool = True) -> CriterionReport:
    """One minus validation accuracy of an OC-SVM trained on SM-only rows.

    Degenerate Gram matrices (e.g. the all-ones Gram of the identity
    genome) or solver failures yield cost 1.0 with a `degenerate` flag
    instead of raising, so search loops stay alive.
    """
    t0 = time.perf_counter()
    degenerate = 0.0
    try:
        K_train = kernels.gram(genome, train_X, projected=projected)
        if np.max(K_train) - np.min(K_train) < 1e-12:
            raise ocsvm.OcsvmError("constant Gram matrix")
        model = ocsvm.train_ocsvm(K_train, nu)
        K_cross = kernels.gram(genome, val_X, train_X, projected=projected)
        predictions = ocsvm.predict(model, K_cross)
        error = 1.0 - float(np.mean(predictions == np.asarray(val_y)))
    except ocsvm.OcsvmError:
        error = 1.0
        degenerate = 1.0
    return CriterionReport(
        name="validation",
        value=error,
        auxiliary={"degenerate": degenerate},
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Composite cost
# ---------------------------------------------------------------------------

@dataclass
class CriterionContext:
    """Everything the individual criteria need besides the genome itself."""

    train_X: np.ndarray | None = None
    val_X: np.ndarray | None = None
    val_y: np.ndarray | None = None
    nu: float = 0.1
    projected: bool = True
    dla_threshold: int | None = None
    expressivity_samples: int = 200
    seed: int = 0
    cache: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _criterion_validation(genome, ctx):
    if ctx.train_X is None or ctx.val_X is None or ctx.val_y is None:
        raise CriterionError("validation criterion requires a discovery split")
    return validation_cost(genome, ctx.train_X, ctx.val_X, ctx.val_y,
                           ctx.nu, ctx.projected)


def _criterion_dla_rank(genome, ctx):
    return dla_rank_criterion(genome, ctx.dla_threshold)


def _criterion_dla_rank_over_threshold(genome, ctx):
    report = dla_rank_criterion(genome, ctx.dla_threshold)
    return CriterionReport(name="dla_rank_over_T",
                           value=report.auxiliary["truncated"],
                           auxiliary={"rank": report.value},
                           wall_time=report.wall_time)


def _criterion_expressivity(genome, ctx):
    return expressivity_estimate(genome, ctx.expressivity_samples, ctx.seed)


def _criterion_one_minus_kta(genome, ctx):
    if ctx.val_X is None or ctx.val_y is None:
        raise CriterionError("alignment criterion requires labeled validation data")
    t0 = time.perf_counter()
    K = kernels.gram(genome, ctx.val_X, projected=ctx.projected)
    try:
        value = 1.0 - centered_kta(K, np.asarray(ctx.val_y, dtype=np.float64))
    except CriterionError:
        value = 2.0  # worst case: constant kernel carries no information
    return CriterionReport(name="one_minus_centered_kta", value=value,
                           wall_time=time.perf_counter() - t0)


_CRITERIA = {
    "validation": _criterion_validation,
    "dla_rank": _criterion_dla_rank,
    "dla_rank_over_T": _criterion_dla_rank_over_threshold,
    "expressivity": _criterion_expressivity,
    "one_minus_centered_kta": _criterion_one_minus_kta,
}

CRITERION_NAMES = tuple(sorted(_CRITERIA))


def composite_cost(genome: KernelGenome, weights: dict[str, float],
                   context: CriterionContext) -> CompositeCost:
    """Evaluate each weighted criterion and their linear combination.

    Results are cached per (genome hash, criterion name), so optimizers
    never recompute identical candidates; the cache supports concurrent
    readers and writers.
    """
    unknown = set(weights) - set(_CRITERIA)
    if unknown:
        raise CriterionError(f"unknown criteria: {sorted(unknown)}")
    reports = []
    genome_key = genome.hash()
    for name in sorted(weights):
        key = (genome_key, name)
        with context._lock:
            report = context.cache.get(key)
        if report is None:
            report = _CRITERIA[name](genome, context)
            with context._lock:
                report = context.cache.setdefault(key, report)
        reports.append(report)
    return CompositeCost(weights=dict(weights), reports=tuple(reports))
