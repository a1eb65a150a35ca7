"""Heuristic search over the genome space: greedy, genetic, Bayesian, SARSA.

Every optimizer consumes cost evaluations through an Evaluator that
caches by genome hash and enforces the evaluation budget (cache misses
only).  Traces record every fresh evaluation in order and can be
persisted as line-delimited text for resume and offline analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .genome import (
    GateSpec,
    KernelGenome,
    SearchSpace,
    crossover,
    decode_flat,
    default_bandwidths,
    encode_flat,
    enumerate_cell_values,
    identity_genome,
    mutate,
    random_genome,
)

__all__ = [
    "Evaluation",
    "OptimizationTrace",
    "Evaluator",
    "BudgetExhausted",
    "greedy_search",
    "genetic_search",
    "bayesian_search",
    "sarsa_search",
    "random_search",
    "run_optimizer",
    "save_trace",
    "load_trace",
]


class BudgetExhausted(Exception):
    """Internal signal: the evaluation budget has been spent."""


@dataclass(frozen=True)
class Evaluation:
    genome: KernelGenome
    cost: float
    index: int


@dataclass(frozen=True)
class OptimizationTrace:
    evaluations: tuple[Evaluation, ...]
    best_genome: KernelGenome
    best_cost: float
    seed: int | None
    notes: tuple[str, ...] = ()


class Evaluator:
    """Budgeted, caching wrapper around a cost function.

    Cache hits are free; only misses count against the budget.  The
    cache may be shared between runs to amortize repeated candidates.
    """

    def __init__(self, cost_fn, budget: int, cache: dict | None = None):
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        self.cost_fn = cost_fn
        self.budget = budget
        self.cache = {} if cache is None else cache
        self.records: list[Evaluation] = []
        self.notes: list[str] = []
        self.best_genome: KernelGenome | None = None
        self.best_cost = math.inf

    @property
    def spent(self) -> int:
        return len(self.records)

    def cost(self, genome: KernelGenome) -> float:
        key = genome.hash()
        if key in self.cache:
            value = self.cache[key]
        else:
            if self.spent >= self.budget:
                raise BudgetExhausted
            value = float(self.cost_fn(genome))
            self.cache[key] = value
            self.records.append(Evaluation(genome, value, self.spent))
        # best tracks cache hits too, so shared caches stay useful
        if value < self.best_cost:
            self.best_genome, self.best_cost = genome, value
        return value

    def trace(self, seed: int | None = None) -> OptimizationTrace:
        if self.best_genome is None:
            raise ValueError("no evaluations recorded")
        return OptimizationTrace(
            evaluations=tuple(self.records),
            best_genome=self.best_genome,
            best_cost=self.best_cost,
            seed=seed,
            notes=tuple(self.notes),
        )


# ---------------------------------------------------------------------------
# Greedy coordinate descent over flat cells
# ---------------------------------------------------------------------------

def greedy_search(initial: KernelGenome, cost_fn, budget: int = 10**6,
                  cache: dict | None = None) -> OptimizationTrace:
    """Cell-wise coordinate descent; deterministic given the initial genome.

    Sweeps the flat cells in index order; at each cell the candidate
    values are evaluated and the argmin committed, with the incumbent
    winning ties.  Repeats until a full sweep changes nothing.
    """
    evaluator = Evaluator(cost_fn, budget, cache)
    current = initial
    try:
        current_cost = evaluator.cost(current)
        changed = True
        while changed:
            changed = False
            for cell in range(current.space.flat_length):
                best_genome, best_cost = current, current_cost
                for candidate in enumerate_cell_values(current, cell):
                    if candidate.hash() == current.hash():
                        continue
                    c = evaluator.cost(candidate)
                    if c < best_cost:
                        best_genome, best_cost = candidate, c
                if best_genome is not current:
                    current, current_cost = best_genome, best_cost
                    changed = True
    except BudgetExhausted:
        evaluator.notes.append("budget exhausted")
    return evaluator.trace()


# ---------------------------------------------------------------------------
# Genetic algorithm
# ---------------------------------------------------------------------------

def genetic_search(space: SearchSpace, cost_fn, seed: int,
                   budget: int = 500, population_size: int = 20,
                   mutation_rate: float = 0.1, max_generations: int = 10_000,
                   bandwidths: tuple[float, ...] | None = None,
                   cache: dict | None = None) -> OptimizationTrace:
    """Tournament selection (size 2), one-point crossover at a gate
    boundary, per-cell mutation, and single-individual elitism.

    `max_generations` bounds the loop when the cache absorbs every
    candidate before the budget is spent (tiny spaces)."""
    if population_size < 2:
        raise ValueError(f"population size must be >= 2, got {population_size}")
    rng = np.random.default_rng(seed)
    evaluator = Evaluator(cost_fn, budget, cache)
    if bandwidths is None:
        bandwidths = default_bandwidths(space.b)

    population = [random_genome(space, rng, bandwidths)
                  for _ in range(population_size)]
    try:
        costs = [evaluator.cost(g) for g in population]
        for _ in range(max_generations):
            elite_idx = int(np.argmin(costs))
            next_pop = [population[elite_idx]]
            next_costs = [costs[elite_idx]]
            while len(next_pop) < population_size:
                parents = []
                for _ in range(2):
                    i, j = rng.integers(population_size, size=2)
                    parents.append(population[i] if costs[i] <= costs[j]
                                   else population[j])
                point = int(rng.integers(space.m + 1))
                child = crossover(parents[0], parents[1], point)
                child = mutate(child, mutation_rate, rng)
                next_pop.append(child)
                next_costs.append(evaluator.cost(child))
            population, costs = next_pop, next_costs
    except BudgetExhausted:
        pass
    return evaluator.trace(seed)


# ---------------------------------------------------------------------------
# Bayesian optimization with a Hamming-kernel Gaussian process
# ---------------------------------------------------------------------------

def _hamming_gram(A: np.ndarray, B: np.ndarray, length_scale: float) -> np.ndarray:
    """exp(-hamming(u, v) / length_scale) for integer-coded genomes."""
    diff = (A[:, None, :] != B[None, :, :]).sum(axis=2)
    return np.exp(-diff / length_scale)


class _HammingGP:
    """Minimal GP regressor over flat genome encodings."""

    def __init__(self, length_scale: float):
        self.length_scale = length_scale
        self.X: np.ndarray | None = None
        self.chol = None
        self.weights = None
        self.y_mean = 0.0
        self.y_scale = 1.0
        self.jitter_used = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray) -> bool:
        """Returns False if the kernel matrix stays ill-conditioned after
        jitter escalation 1e-8 -> 1e-4."""
        self.X = X
        self.y_mean = float(y.mean())
        self.y_scale = float(y.std()) or 1.0
        y_n = (y - self.y_mean) / self.y_scale
        K = _hamming_gram(X, X, self.length_scale)
        for jitter in (1e-8, 1e-6, 1e-4):
            try:
                chol = np.linalg.cholesky(K + jitter * np.eye(len(X)))
            except np.linalg.LinAlgError:
                continue
            self.chol = chol
            self.weights = np.linalg.solve(chol.T, np.linalg.solve(chol, y_n))
            self.jitter_used = jitter
            return True
        return False

    def predict(self, X_new: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k_star = _hamming_gram(X_new, self.X, self.length_scale)
        mean_n = k_star @ self.weights
        v = np.linalg.solve(self.chol, k_star.T)
        var_n = np.clip(1.0 + self.jitter_used - np.sum(v**2, axis=0), 0.0, None)
        mean = mean_n * self.y_scale + self.y_mean
        std = np.sqrt(var_n) * self.y_scale
        return mean, std


def _expected_improvement(mean: np.ndarray, std: np.ndarray,
                          best: float) -> np.ndarray:
    from scipy.stats import norm

    improvement = best - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std > 0, improvement / np.where(std > 0, std, 1.0), 0.0)
    ei = improvement * norm.cdf(z) + std * norm.pdf(z)
    return np.where(std > 0, ei, np.maximum(improvement, 0.0))


def bayesian_search(space: SearchSpace, cost_fn, seed: int,
                    iterations: int = 5, batch_size: int = 5,
                    initial_random: int = 4,
                    initial: KernelGenome | None = None,
                    pool_size: int = 200,
                    acquisition: str = "ei", ucb_kappa: float = 2.0,
                    length_scale: float | None = None,
                    bandwidths: tuple[float, ...] | None = None,
                    cache: dict | None = None) -> OptimizationTrace:
    """GP surrogate over flat encodings with a Hamming similarity kernel.

    The initial design is the identity genome (or `initial`) plus
    `initial_random` random genomes.  Each iteration scores a candidate
    pool (random genomes plus mutations of the incumbent best) with the
    acquisition function and evaluates the top `batch_size` candidates.
    """
    if iterations < 0 or batch_size < 1:
        raise ValueError("iterations must be >= 0 and batch size >= 1")
    if acquisition not in ("ei", "ucb"):
        raise ValueError(f"unknown acquisition {acquisition!r}")
    rng = np.random.default_rng(seed)
    if bandwidths is None:
        bandwidths = default_bandwidths(space.b)
    if length_scale is None:
        length_scale = max(1.0, space.flat_length / 8.0)
    budget = initial_random + 1 + iterations * batch_size
    evaluator = Evaluator(cost_fn, budget, cache)

    if initial is None:
        initial = identity_genome(space.n, space.m, space.d, space.b)
    design = [initial] + [random_genome(space, rng, bandwidths)
                          for _ in range(initial_random)]
    observed: dict[str, tuple[KernelGenome, float]] = {}
    try:
        for g in design:
            observed[g.hash()] = (g, evaluator.cost(g))

        for _ in range(iterations):
            genomes = [g for g, _ in observed.values()]
            ys = np.array([c for _, c in observed.values()])
            best_genome = genomes[int(np.argmin(ys))]
            best_cost = float(ys.min())

            pool: list[KernelGenome] = []
            seen = set(observed)
            for _ in range(pool_size):
                cand = random_genome(space, rng, bandwidths)
                if cand.hash() not in seen:
                    seen.add(cand.hash())
                    pool.append(cand)
            for _ in range(pool_size // 4):
                cand = mutate(best_genome, 0.15, rng)
                if cand.hash() not in seen:
                    seen.add(cand.hash())
                    pool.append(cand)
            if not pool:
                evaluator.notes.append("candidate pool exhausted")
                break

            X = np.array([encode_flat(g) for g in genomes])
            gp = _HammingGP(length_scale)
            if gp.fit(X, ys):
                X_pool = np.array([encode_flat(g) for g in pool])
                mean, std = gp.predict(X_pool)
                if acquisition == "ei":
                    scores = _expected_improvement(mean, std, best_cost)
                else:
                    scores = -(mean - ucb_kappa * std)  # lower confidence bound
                ranked = np.argsort(-scores, kind="stable")
            else:
                evaluator.notes.append("surrogate ill-conditioned: random proposals")
                ranked = rng.permutation(len(pool))

            for idx in ranked[:batch_size]:
                cand = pool[int(idx)]
                observed[cand.hash()] = (cand, evaluator.cost(cand))
    except BudgetExhausted:
        evaluator.notes.append("budget exhausted")
    return evaluator.trace(seed)


# ---------------------------------------------------------------------------
# SARSA over circuit prefixes
# ---------------------------------------------------------------------------

def _action_count(space: SearchSpace) -> int:
    return 16 * space.n * (space.n - 1) * space.d * space.b


def _action_to_gate(action: int, space: SearchSpace) -> GateSpec:
    radices = (4, 4, space.n, space.n - 1, space.d, space.b)
    vals = []
    for r in reversed(radices):
        vals.append(action % r)
        action //= r
    alpha, beta, p, q, k, j = reversed(vals)
    return GateSpec(alpha, beta, p, q, k, j)


def sarsa_search(space: SearchSpace, cost_fn, seed: int,
                 episodes: int = 200, learning_rate: float = 0.5,
                 discount: float = 1.0,
                 epsilon_start: float = 1.0, epsilon_end: float = 0.1,
                 measure_mask: int | None = None,
                 bandwidths: tuple[float, ...] | None = None,
                 cache: dict | None = None) -> OptimizationTrace:
    """Tabular SARSA on the episodic gate-placement MDP.

    State = the prefix of gates placed so far; action = the next gate
    tuple; episodes run to length m with a sparse terminal reward of
    -cost(completed genome).  Epsilon is annealed linearly per episode.
    """
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    rng = np.random.default_rng(seed)
    evaluator = Evaluator(cost_fn, episodes, cache)
    if bandwidths is None:
        bandwidths = default_bandwidths(space.b)
    if measure_mask is None:
        measure_mask = (1 << space.n) - 1
    n_actions = _action_count(space)
    q_table: dict[tuple, dict[int, float]] = {}

    def choose(state: tuple, epsilon: float) -> int:
        known = q_table.get(state)
        if known and rng.random() >= epsilon:
            best_val = max(known.values())
            # deterministic tie-break on action index
            return min(a for a, v in known.items() if v == best_val)
        return int(rng.integers(n_actions))

    try:
        for episode in range(episodes):
            frac = episode / max(episodes - 1, 1)
            epsilon = epsilon_start + frac * (epsilon_end - epsilon_start)
            state: tuple = ()
            action = choose(state, epsilon)
            transitions = []
            for step in range(space.m):
                next_state = state + (action,)
                if step + 1 < space.m:
                    next_action = choose(next_state, epsilon)
                    transitions.append((state, action, 0.0, next_state, next_action))
                    state, action = next_state, next_action
                else:
                    gates = tuple(_action_to_gate(a, space) for a in next_state)
                    genome = KernelGenome(space.n, space.d, gates,
                                          measure_mask, bandwidths)
                    reward = -evaluator.cost(genome)
                    transitions.append((state, action, reward, None, None))
            for s, a, r, s_next, a_next in transitions:
                q_s = q_table.setdefault(s, {})
                old = q_s.get(a, 0.0)
                target = r if s_next is None else (
                    r + discount * q_table.get(s_next, {}).get(a_next, 0.0))
                q_s[a] = old + learning_rate * (target - old)
    except BudgetExhausted:
        evaluator.notes.append("budget exhausted")
    return evaluator.trace(seed)


# ---------------------------------------------------------------------------
# Random search baseline
# ---------------------------------------------------------------------------

def random_search(space: SearchSpace, cost_fn, seed: int, budget: int,
                  bandwidths: tuple[float, ...] | None = None,
                  cache: dict | None = None) -> OptimizationTrace:
    """Uniform random sampling, the baseline the smarter searches must beat."""
    rng = np.random.default_rng(seed)
    if bandwidths is None:
        bandwidths = default_bandwidths(space.b)
    evaluator = Evaluator(cost_fn, budget, cache)
    try:
        # attempt cap guards tiny spaces that the cache fully absorbs
        for _ in range(1000 * budget):
            evaluator.cost(random_genome(space, rng, bandwidths))
    except BudgetExhausted:
        pass
    return evaluator.trace(seed)


def run_optimizer(kind: str, space: SearchSpace, cost_fn, seed: int,
                  initial: KernelGenome | None = None,
                  cache: dict | None = None, **params) -> OptimizationTrace:
    """Dispatch by optimizer kind with the module defaults."""
    if kind == "greedy":
        if initial is None:
            initial = identity_genome(space.n, space.m, space.d, space.b)
        return greedy_search(initial, cost_fn, cache=cache, **params)
    if kind == "genetic":
        return genetic_search(space, cost_fn, seed, cache=cache, **params)
    if kind == "bayesian":
        return bayesian_search(space, cost_fn, seed, initial=initial,
                               cache=cache, **params)
    if kind == "sarsa":
        return sarsa_search(space, cost_fn, seed, cache=cache, **params)
    if kind == "random":
        return random_search(space, cost_fn, seed, cache=cache, **params)
    raise ValueError(f"unknown optimizer kind {kind!r}")


# ---------------------------------------------------------------------------
# Trace persistence: one evaluation per line (flat genome, cost)
# ---------------------------------------------------------------------------

def save_trace(trace: OptimizationTrace, path) -> None:
    with open(path, "w") as fh:
        for ev in trace.evaluations:
            flat = ",".join(str(v) for v in encode_flat(ev.genome))
            fh.write(f"{flat}\t{ev.cost!r}\n")


def load_trace(path, space: SearchSpace,
               bandwidths: tuple[float, ...] | None = None) -> OptimizationTrace:
    evaluations = []
    with open(path) as fh:
        for idx, line in enumerate(fh):
            flat_text, cost_text = line.rstrip("\n").split("\t")
            flat = [int(v) for v in flat_text.split(",")]
            genome = decode_flat(flat, space, bandwidths)
            evaluations.append(Evaluation(genome, float(cost_text), idx))
    if not evaluations:
        raise ValueError(f"empty trace file: {path}")
    best = min(evaluations, key=lambda e: e.cost)
    return OptimizationTrace(tuple(evaluations), best.genome, best.cost, None)
