"""Finite-population model of a completely randomized two-arm experiment.

The population of potential outcomes is fixed; the only randomness is which
``n`` of the ``N`` subjects receive treatment, uniformly over all subsets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, EmptyArm, RankOutOfRange
from .ordering import (
    DEATH,
    DEFAULT_PLACEMENT,
    DeathPlacement,
    Outcome,
    Quality,
    order_stat,
    sort_outcomes,
)

__all__ = [
    "PotentialOutcomes", "Assignment", "ObservedExperiment", "UpsilonTruth",
    "randomize", "observe", "ground_truth_upsilon",
    "SynthSpec", "DEMO_SPEC", "synth_population", "demo_experiment",
    "sharp_null_population",
]


@dataclass(frozen=True)
class PotentialOutcomes:
    subjects: tuple[tuple[Outcome, Outcome], ...]
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple((rt, rc) for rt, rc in self.subjects))
        if len(self.subjects) < 2:
            raise DomainError("a population needs at least two subjects")
        if self.ids is not None:
            object.__setattr__(self, "ids", tuple(self.ids))
            if len(self.ids) != len(self.subjects):
                raise DomainError("ids and subjects differ in length")

    @property
    def N(self) -> int:
        return len(self.subjects)

    def subject_ids(self) -> tuple[str, ...]:
        if self.ids is not None:
            return self.ids
        width = len(str(self.N))
        return tuple(f"s{k + 1:0{width}d}" for k in range(self.N))

    @property
    def treated_outcomes(self) -> tuple[Outcome, ...]:
        return tuple(rt for rt, _ in self.subjects)

    @property
    def control_outcomes(self) -> tuple[Outcome, ...]:
        return tuple(rc for _, rc in self.subjects)


@dataclass(frozen=True)
class Assignment:
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        if any(v not in (0, 1) for v in self.z):
            raise DomainError("assignment entries must be 0 or 1")

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def n(self) -> int:
        return sum(self.z)

    @classmethod
    def from_treated(cls, N: int, treated: Sequence[int]) -> "Assignment":
        z = [0] * N
        for k in treated:
            z[k] = 1
        return cls(tuple(z))


@dataclass(frozen=True)
class ObservedExperiment:
    """Observed data: arm indicator and realized outcome for each subject."""

    z: tuple[int, ...]
    outcomes: tuple[Outcome, ...]
    ids: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if len(self.z) != len(self.outcomes):
            raise DomainError("arm indicators and outcomes differ in length")
        if any(v not in (0, 1) for v in self.z):
            raise DomainError("arm indicators must be 0 or 1")
        if self.ids is not None:
            object.__setattr__(self, "ids", tuple(self.ids))
            if len(self.ids) != len(self.z):
                raise DomainError("ids and outcomes differ in length")

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def n(self) -> int:
        return sum(self.z)

    @property
    def m(self) -> int:
        return self.N - self.n

    def arm(self, treated: bool) -> tuple[list[Outcome], list[int]]:
        want = 1 if treated else 0
        idx = [k for k, v in enumerate(self.z) if v == want]
        return [self.outcomes[k] for k in idx], idx

    def sorted_arm(self, treated: bool, p: DeathPlacement = DEFAULT_PLACEMENT):
        xs, idx = self.arm(treated)
        return sort_outcomes(xs, p, indices=idx, group="treated" if treated else "control")

    def swapped(self) -> "ObservedExperiment":
        """The same data with the arm labels exchanged."""
        return ObservedExperiment(tuple(1 - v for v in self.z), self.outcomes, self.ids)

    def require_both_arms(self):
        if self.n == 0:
            raise EmptyArm("no treated subjects")
        if self.m == 0:
            raise EmptyArm("no control subjects")


@dataclass(frozen=True)
class UpsilonTruth:
    i: int
    treated_stat: Outcome
    counterfactual_stat: Outcome


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def draw_treated(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    """Indices of a uniformly random ``n``-subset of ``range(N)``."""
    return rng.choice(N, size=n, replace=False)


def randomize(N: int, n: int, seed=None) -> Assignment:
    """Uniform random assignment of ``n`` of ``N`` subjects to treatment.

    ``seed`` may be an int, a :class:`numpy.random.SeedSequence` or a
    Generator. The result is deterministic given an int or SeedSequence.
    """
    if not (isinstance(N, int) and isinstance(n, int)) or not 1 <= n < N:
        raise DomainError(f"need 1 <= n < N, got N={N}, n={n}")
    treated = draw_treated(_as_rng(seed), N, n)
    return Assignment.from_treated(N, treated.tolist())


def observe(pop: PotentialOutcomes, z: Assignment) -> ObservedExperiment:
    if len(z.z) != pop.N:
        raise DomainError(f"assignment has length {len(z.z)}, population has {pop.N}")
    outcomes = tuple(rt if zi else rc for zi, (rt, rc) in zip(z.z, pop.subjects))
    return ObservedExperiment(z.z, outcomes, pop.ids)


def ground_truth_upsilon(
    pop: PotentialOutcomes, z: Assignment, i: int, p: DeathPlacement = DEFAULT_PLACEMENT
) -> UpsilonTruth:
    """The i-th treated order statistic and its counterfactual under control.

    Both coordinates come from the treated subjects only: the second is the
    i-th smallest of the control responses those same subjects would have had.
    """
    if len(z.z) != pop.N:
        raise DomainError("assignment and population differ in length")
    treated = [k for k, v in enumerate(z.z) if v]
    if not 1 <= i <= len(treated):
        raise RankOutOfRange(f"rank {i} outside 1..{len(treated)}")
    rt = sort_outcomes([pop.subjects[k][0] for k in treated], p, treated)
    rc = sort_outcomes([pop.subjects[k][1] for k in treated], p, treated)
    return UpsilonTruth(i, order_stat(rt, i), order_stat(rc, i))


def sharp_null_population(obs: ObservedExperiment) -> PotentialOutcomes:
    """Population in which every subject's two potential outcomes equal its observed one."""
    return PotentialOutcomes(tuple((r, r) for r in obs.outcomes), obs.ids)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic population.

    Each subject dies under treatment with probability ``death_treated`` and
    under control with probability ``death_control``. Survivors get a normal
    quality score with the arm's ``(loc, scale)``. ``correlation`` links the
    two potential scores of a subject. Scores are rounded to ``decimals``
    places; rounding creates ties, as real score scales do.
    """

    N: int = 650
    death_treated: float = 16 / 325
    death_control: float = 111 / 325
    quality_treated: tuple[float, float] = (4.2, 0.8)
    quality_control: tuple[float, float] = (4.45, 0.55)
    correlation: float = 0.5
    decimals: int | None = 2
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("N must be at least 2")
        for name in ("death_treated", "death_control"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if not -1.0 <= self.correlation <= 1.0:
            raise DomainError("correlation must lie in [-1, 1]")
        for name in ("quality_treated", "quality_control"):
            loc, scale = getattr(self, name)
            if scale < 0:
                raise DomainError(f"{name} scale must be nonnegative")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown synthetic-population keys: {sorted(unknown)}")
        d = dict(d)
        for name in ("quality_treated", "quality_control"):
            if name in d:
                d[name] = tuple(float(v) for v in d[name])
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "death_treated": self.death_treated,
            "death_control": self.death_control,
            "quality_treated": list(self.quality_treated),
            "quality_control": list(self.quality_control),
            "correlation": self.correlation,
            "decimals": self.decimals,
            "seed": self.seed,
        }


DEMO_SPEC = SynthSpec()


def _score(value: float, decimals: int | None) -> Quality:
    if decimals is None:
        return Quality(float(value))
    v = round(float(value), decimals)
    return Quality(v, f"{v:.{decimals}f}")


def synth_population(spec: SynthSpec) -> PotentialOutcomes:
    rng = _as_rng(spec.seed)
    N = spec.N
    dead_t = rng.random(N) < spec.death_treated
    dead_c = rng.random(N) < spec.death_control
    shared = rng.standard_normal(N)
    rho = spec.correlation
    own = rng.standard_normal((2, N))
    lat_t = rho * shared + math.sqrt(1 - rho * rho) * own[0]
    lat_c = rho * shared + math.sqrt(1 - rho * rho) * own[1]
    (loc_t, sc_t), (loc_c, sc_c) = spec.quality_treated, spec.quality_control
    subjects = []
    for k in range(N):
        rt = DEATH if dead_t[k] else _score(loc_t + sc_t * lat_t[k], spec.decimals)
        rc = DEATH if dead_c[k] else _score(loc_c + sc_c * lat_c[k], spec.decimals)
        subjects.append((rt, rc))
    return PotentialOutcomes(tuple(subjects))


# Rank -> score anchors for the deterministic demo dataset, indexed among
# survivors of each arm.
_TREATED_ANCHORS = [(1, 1.80), (25, 3.10), (41, 3.23), (66, 3.49), (67, 3.50),
                    (147, 4.19), (228, 4.79), (269, 5.20), (309, 6.40)]
_CONTROL_ANCHORS = [(1, 3.52), (27, 3.81), (78, 4.16), (110, 4.43), (155, 4.94),
                    (156, 4.98), (191, 5.58), (214, 6.50)]


def _interpolated_scores(anchors, count):
    ranks, values = zip(*anchors)
    grid = np.interp(np.arange(1, count + 1), ranks, values)
    return [_score(v, 2) for v in grid]


def demo_experiment() -> ObservedExperiment:
    """Deterministic 325 vs 325 dataset with 16 treated and 111 control deaths.

    66 treated survivors score below 3.5 and no control survivor does. Scores
    are interpolated so that, under the default placement, R_T(41)=3.10,
    R_T(82)=3.49, R_T(163)=4.19, R_T(244)=4.79, R_T(285)=5.20 and
    R_C(138)=3.81, R_C(189)=4.16, R_C(221)=4.43, R_C(266)=4.94,
    R_C(267)=4.98, R_C(302)=5.58.
    """
    treated = [DEATH] * 16 + _interpolated_scores(_TREATED_ANCHORS, 309)
    control = [DEATH] * 111 + _interpolated_scores(_CONTROL_ANCHORS, 214)
    # Interleave arms so row order carries no information.
    outcomes, z, ids = [], [], []
    for k in range(325):
        outcomes += [treated[k], control[k]]
        z += [1, 0]
        ids += [f"t{k + 1:03d}", f"c{k + 1:03d}"]
    return ObservedExperiment(tuple(z), tuple(outcomes), tuple(ids))
