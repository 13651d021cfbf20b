"""Ground-truth coverage: exhaustive enumeration and Monte Carlo simulation.

Enumeration visits every treated subset of a small population and is the
oracle the exact formulas are tested against. The Monte Carlo path repeats
randomize -> observe -> confidence set -> compare with the counterfactual
truth on a fixed population.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from .errors import BudgetExceeded, DomainError, IntervalInfeasible, RankOutOfRange
from .exact import DesignCounts, RankInterval, confidence_set, find_interval, format_probability
from .experiment import (
    PotentialOutcomes,
    draw_treated,
    ground_truth_upsilon,
    observe,
    Assignment,
)
from .ordering import DEFAULT_PLACEMENT, DeathPlacement, Quality

__all__ = [
    "DEFAULT_BUDGET", "enumerate_event_coverage", "enumerate_counts", "enumerate_pmf",
    "untied_population", "CoverageEstimate", "mc_coverage", "coverage_report",
]

DEFAULT_BUDGET = 10**6


def _check_budget(N, n, budget):
    total = math.comb(N, n)
    if total > budget:
        raise BudgetExceeded(f"C({N}, {n}) = {total} assignments exceeds budget {budget}")
    return total


def untied_population(N: int) -> PotentialOutcomes:
    """Population whose control responses are the distinct scores 1..N."""
    return PotentialOutcomes(tuple((Quality(float(k)), Quality(float(k))) for k in range(1, N + 1)))


def enumerate_event_coverage(
    pop: PotentialOutcomes,
    n: int,
    i: int,
    a: int,
    b: int,
    p: DeathPlacement = DEFAULT_PLACEMENT,
    budget: int = DEFAULT_BUDGET,
) -> Fraction:
    """Fraction of all treated ``n``-subsets with R_C(a) <= R~_C(i) <= R_C(b)."""
    N = pop.N
    if not 1 <= n < N:
        raise DomainError(f"need 1 <= n < N, got n={n}, N={N}")
    m = N - n
    if not 1 <= i <= n:
        raise RankOutOfRange(f"rank {i} outside 1..{n}")
    if not 1 <= a <= b <= m:
        raise DomainError(f"need 1 <= a <= b <= {m}")
    total = _check_budget(N, n, budget)
    keys = [p.key(rc) for _, rc in pop.subjects]
    everyone = set(range(N))
    hits = 0
    for treated in itertools.combinations(range(N), n):
        tilde = sorted(keys[k] for k in treated)[i - 1]
        control = sorted(keys[k] for k in everyone.difference(treated))
        if control[a - 1] <= tilde <= control[b - 1]:
            hits += 1
    return Fraction(hits, total)


def enumerate_counts(
    pop: PotentialOutcomes,
    n: int,
    i: int,
    p: DeathPlacement = DEFAULT_PLACEMENT,
    budget: int = DEFAULT_BUDGET,
) -> list[int]:
    """Number of assignments with exactly ``j`` controls strictly below R~_C(i), j = 0..m."""
    N = pop.N
    if not 1 <= n < N:
        raise DomainError(f"need 1 <= n < N, got n={n}, N={N}")
    if not 1 <= i <= n:
        raise RankOutOfRange(f"rank {i} outside 1..{n}")
    _check_budget(N, n, budget)
    keys = [p.key(rc) for _, rc in pop.subjects]
    counts = [0] * (N - n + 1)
    for treated in itertools.combinations(range(N), n):
        chosen = set(treated)
        tilde = sorted(keys[k] for k in treated)[i - 1]
        j = sum(1 for k in range(N) if k not in chosen and keys[k] < tilde)
        counts[j] += 1
    return counts


def enumerate_pmf(N: int, n: int, i: int, budget: int = DEFAULT_BUDGET) -> list[Fraction]:
    counts = enumerate_counts(untied_population(N), n, i, budget=budget)
    total = sum(counts)
    return [Fraction(c, total) for c in counts]


@dataclass(frozen=True)
class CoverageEstimate:
    trials: int
    hits: int
    infeasible: int = 0
    confidence: float = 0.95
    interval: RankInterval | None = None

    def __post_init__(self):
        if not 0 <= self.hits <= self.trials:
            raise DomainError("hits must lie in 0..trials")

    @property
    def estimate(self) -> float:
        return self.hits / self.trials if self.trials else math.nan

    @property
    def standard_error(self) -> float:
        if not self.trials:
            return math.nan
        e = self.estimate
        return math.sqrt(e * (1 - e) / self.trials)

    @property
    def lower_bound(self) -> float:
        """One-sided normal-approximation lower confidence bound."""
        z = NormalDist().inv_cdf(self.confidence)
        return max(0.0, self.estimate - z * self.standard_error)


def _rank_keys(pop: PotentialOutcomes, p: DeathPlacement):
    # Dense integer ranks that preserve the order and ties of both potential outcomes.
    keys = [p.key(x) for pair in pop.subjects for x in pair]
    dense = {k: r for r, k in enumerate(sorted(set(keys)))}
    arr = np.array([dense[k] for k in keys], dtype=np.int64).reshape(-1, 2)
    return arr[:, 0].copy(), arr[:, 1].copy()


def _fast_hits(rc, n, i, a, b, seeds):
    N = len(rc)
    hits = 0
    mask = np.zeros(N, dtype=bool)
    for ss in seeds:
        rng = np.random.Generator(np.random.PCG64(ss))
        treated = draw_treated(rng, N, n)
        mask[:] = False
        mask[treated] = True
        tilde = np.partition(rc[mask], i - 1)[i - 1]
        control = np.sort(rc[~mask])
        if control[a - 1] <= tilde <= control[b - 1]:
            hits += 1
    return hits


def _slow_hits(pop, n, i, alpha, p, policy, seeds):
    hits = 0
    for ss in seeds:
        rng = np.random.Generator(np.random.PCG64(ss))
        z = Assignment.from_treated(pop.N, draw_treated(rng, pop.N, n).tolist())
        cs = confidence_set(observe(pop, z), i, alpha, p, policy)
        truth = ground_truth_upsilon(pop, z, i, p)
        if cs.contains(truth.counterfactual_stat):
            hits += 1
    return hits


def mc_coverage(
    pop: PotentialOutcomes,
    i: int,
    alpha=0.05,
    p: DeathPlacement = DEFAULT_PLACEMENT,
    policy: str = "paper",
    trials: int = 10_000,
    seed: int = 0,
    n: int | None = None,
    workers: int = 1,
    fast: bool = True,
) -> CoverageEstimate:
    """Monte Carlo coverage of the confidence set for treated rank ``i``.

    Every trial draws its assignment from its own child of ``SeedSequence(seed)``,
    so results do not depend on ``workers``. ``fast=False`` runs the full
    object pipeline and must agree with the vectorized path trial for trial.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    N = pop.N
    n = N // 2 if n is None else n
    if not 1 <= n < N:
        raise DomainError(f"need 1 <= n < N, got n={n}, N={N}")
    if not 1 <= i <= n:
        raise RankOutOfRange(f"rank {i} outside 1..{n}")
    try:
        interval = find_interval(i, DesignCounts(n, N - n), alpha, policy)
    except IntervalInfeasible:
        # The interval depends only on the design, so every trial is infeasible.
        return CoverageEstimate(trials=0, hits=0, infeasible=trials)

    seeds = np.random.SeedSequence(seed).spawn(trials)
    if fast:
        _, rc = _rank_keys(pop, p)
        work = lambda chunk: _fast_hits(rc, n, i, interval.a, interval.b, chunk)
    else:
        work = lambda chunk: _slow_hits(pop, n, i, alpha, p, policy, chunk)
    if workers <= 1:
        hits = work(seeds)
    else:
        size = math.ceil(trials / workers)
        chunks = [seeds[k:k + size] for k in range(0, trials, size)]
        with ThreadPoolExecutor(workers) as ex:
            hits = sum(ex.map(work, chunks))
    return CoverageEstimate(trials=trials, hits=hits, interval=interval)


def coverage_report(est: CoverageEstimate, *, population: dict, i: int, alpha, placement: DeathPlacement,
                    policy: str, seed: int, n: int) -> dict:
    """JSON-ready validation report."""
    iv = est.interval
    return {
        "schema_version": 1,
        "kind": "coverage",
        "population": population,
        "design": {"N": population.get("N"), "n": n, "m": population.get("N") - n},
        "i": i,
        "alpha": str(alpha),
        "placement": placement.label(),
        "placement_semantics": placement.describe(),
        "policy": policy,
        "seed": seed,
        "trials": est.trials,
        "infeasible_trials": est.infeasible,
        "hits": est.hits,
        "estimate": _fmt(est.estimate),
        "standard_error": _fmt(est.standard_error),
        "lower_bound": _fmt(est.lower_bound),
        "interval": None if iv is None else {
            "a": iv.a,
            "b": iv.b,
            "eq1_coverage": iv.printed_decimal,
            "event_coverage": iv.event_decimal,
        },
    }


def _fmt(x: float) -> str | None:
    if math.isnan(x):
        return None
    return format_probability(Fraction(x))
