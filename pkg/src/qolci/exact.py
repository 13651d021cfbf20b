"""Exact randomization inference for treated order statistics.

For a treated rank ``i``, the target is the pair formed by the observed i-th
treated outcome and the unobserved i-th outcome the same treated subjects
would have shown under control. Under uniform random assignment, the number
``j`` of control responses lying strictly below that unobserved value has the
distribution

    P(j) = C(m+n-i-j, m-j) * C(i+j-1, j) / C(N, m),   j = 0..m

and the closed interval between control order statistics ``a`` and ``b``
covers it exactly when ``a <= j <= b-1`` (untied responses; ties only raise
coverage). All probabilities here are exact ``Fraction`` values built from
Python integers.

Three interval sums are exposed:

* :func:`eq1_coverage` sums ``j = a..b``, the formula in its customary form;
* :func:`event_coverage` sums ``j = a..b-1``, the actual coverage event;
* :func:`conservative_coverage` sums ``j = a..b-2``, a lower bound on the event.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DomainError, EmptyArm, IntervalInfeasible, RankOutOfRange
from .experiment import ObservedExperiment
from .ordering import DEFAULT_PLACEMENT, DeathPlacement, Ordering, Outcome, compare, order_stat

__all__ = [
    "binom", "DesignCounts", "fw_pmf", "pmf_table",
    "eq1_coverage", "event_coverage", "conservative_coverage",
    "RankInterval", "POLICIES", "PAPER_POLICY", "resolve_policy", "find_interval",
    "ConfidenceSet", "confidence_set", "confidence_set_dual",
    "EffectCall", "classify", "quantile_indices", "parse_quantile",
    "format_probability", "as_fraction",
]


def binom(u: int, k: int) -> int:
    if u < 0 or k < 0:
        raise DomainError(f"binom needs nonnegative arguments, got ({u}, {k})")
    return math.comb(u, k)


@dataclass(frozen=True)
class DesignCounts:
    n: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise DomainError("design counts must be integers")
        if self.n < 1 or self.m < 1:
            raise DomainError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")

    @property
    def N(self) -> int:
        return self.n + self.m

    @classmethod
    def from_total(cls, N: int, n: int) -> "DesignCounts":
        return cls(n, N - n)

    def swapped(self) -> "DesignCounts":
        return DesignCounts(self.m, self.n)


def _check_rank(i: int, d: DesignCounts):
    if not 1 <= i <= d.n:
        raise DomainError(f"treated rank i={i} outside 1..{d.n}")


@lru_cache(maxsize=256)
def _counts(i: int, n: int, m: int) -> tuple[tuple[int, ...], int]:
    """Assignment counts for j = 0..m and their total C(N, m)."""
    c = tuple(math.comb(m + n - i - j, m - j) * math.comb(i + j - 1, j) for j in range(m + 1))
    return c, math.comb(n + m, m)


@lru_cache(maxsize=256)
def _prefix(i: int, n: int, m: int) -> tuple[tuple[int, ...], int]:
    """Prefix sums P[k] = sum_{j<k} count_j for k = 0..m+1."""
    c, total = _counts(i, n, m)
    out = [0]
    for v in c:
        out.append(out[-1] + v)
    return tuple(out), total


def fw_pmf(j: int, i: int, d: DesignCounts) -> Fraction:
    """Probability that exactly ``j`` controls lie strictly below the target."""
    _check_rank(i, d)
    if not 0 <= j <= d.m:
        raise DomainError(f"j={j} outside 0..{d.m}")
    c, total = _counts(i, d.n, d.m)
    return Fraction(c[j], total)


def pmf_table(i: int, d: DesignCounts) -> list[Fraction]:
    _check_rank(i, d)
    c, total = _counts(i, d.n, d.m)
    return [Fraction(v, total) for v in c]


def _check_ab(a: int, b: int, d: DesignCounts):
    if not 1 <= a <= b <= d.m:
        raise DomainError(f"need 1 <= a <= b <= m={d.m}, got a={a}, b={b}")


def _window(i: int, d: DesignCounts, lo: int, hi: int) -> Fraction:
    # sum_{j=lo..hi}, empty when hi < lo
    P, total = _prefix(i, d.n, d.m)
    if hi < lo:
        return Fraction(0)
    return Fraction(P[hi + 1] - P[lo], total)


def eq1_coverage(a: int, b: int, i: int, d: DesignCounts) -> Fraction:
    _check_rank(i, d)
    _check_ab(a, b, d)
    return _window(i, d, a, b)


def event_coverage(a: int, b: int, i: int, d: DesignCounts) -> Fraction:
    """P(R_C(a) <= target <= R_C(b)) for untied responses."""
    _check_rank(i, d)
    _check_ab(a, b, d)
    return _window(i, d, a, b - 1)


def conservative_coverage(a: int, b: int, i: int, d: DesignCounts) -> Fraction:
    _check_rank(i, d)
    _check_ab(a, b, d)
    return _window(i, d, a, b - 2)


def format_probability(x: Fraction, digits: int = 12) -> str:
    """Decimal rendering of an exact probability to ``digits`` significant digits."""
    x = Fraction(x)
    if x == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        q = Decimal(x.numerator) / Decimal(x.denominator)
    s = format(q, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def as_fraction(x) -> Fraction:
    """Exact value of a level given as str, float, int or Fraction.

    Floats go through their shortest repr, so ``0.05`` becomes ``1/20``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class RankInterval:
    a: int
    b: int
    printed_coverage: Fraction
    event_coverage: Fraction
    conservative_coverage: Fraction
    policy: str = "shortest"

    @property
    def width(self) -> int:
        return self.b - self.a

    @property
    def printed_decimal(self) -> str:
        return format_probability(self.printed_coverage)

    @property
    def event_decimal(self) -> str:
        return format_probability(self.event_coverage)

    @property
    def conservative_decimal(self) -> str:
        return format_probability(self.conservative_coverage)


POLICIES = ("shortest", "equal_tail", "paper", "conservative")

# Neither shortest nor equal_tail reproduces all five published rank
# intervals for n = m = 325 at alpha = 0.05; "paper" falls back to equal_tail.
PAPER_POLICY = "equal_tail"

PAPER_POLICY_NOTE = (
    "policy 'paper' resolves to 'equal_tail'. The published 95% rank intervals "
    "for n=m=325 ((25,60), (61,106), (138,189), (221,266), (267,302)) are "
    "reproduced by policy 'conservative' (equal tails, coverage summed over "
    "j=a..b-2); 'equal_tail' on the exact coverage event gives intervals that "
    "are no wider and still reach the level."
)


def resolve_policy(policy: str) -> str:
    if policy not in POLICIES:
        raise DomainError(f"unknown policy {policy!r}; choose from {', '.join(POLICIES)}")
    return PAPER_POLICY if policy == "paper" else policy


def _make_interval(a, b, i, d, policy):
    return RankInterval(
        a=a,
        b=b,
        printed_coverage=_window(i, d, a, b),
        event_coverage=_window(i, d, a, b - 1),
        conservative_coverage=_window(i, d, a, b - 2),
        policy=policy,
    )


def _infeasible(i, d, alpha, why):
    max_event = _window(i, d, 1, d.m - 1)
    max_eq1 = _window(i, d, 1, d.m)
    return IntervalInfeasible(
        f"no rank interval reaches coverage {1 - alpha} for i={i}, n={d.n}, m={d.m} ({why}); "
        f"widest interval covers {format_probability(max_event)}",
        max_event,
        max_eq1,
    )


def find_interval(i: int, d: DesignCounts, alpha=0.05, policy: str = "shortest") -> RankInterval:
    """Choose control ranks ``(a, b)`` whose closed interval covers with probability >= 1-alpha.

    ``shortest`` minimizes ``b - a`` (ties: larger coverage, then smaller a).
    ``equal_tail`` takes the largest ``a`` with P(j < a) <= alpha/2 and the
    smallest ``b`` with P(j >= b) <= alpha/2. ``conservative`` is equal-tailed
    on the ``j = a..b-2`` sum. ``paper`` is an alias, see :data:`PAPER_POLICY`.
    """
    _check_rank(i, d)
    alpha = as_fraction(alpha)
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    resolved = resolve_policy(policy)
    P, total = _prefix(i, d.n, d.m)
    m = d.m
    # Integer thresholds: coverage >= 1-alpha  <=>  count >= need.
    need = math.ceil((1 - alpha) * total)
    half = alpha / 2 * total  # tail count must be <= half

    if resolved == "shortest":
        best = None
        for a in range(1, m + 1):
            b = bisect.bisect_left(P, P[a] + need, lo=a)
            if b > m:
                break
            key = (b - a, -(P[b] - P[a]), a)
            if best is None or key < best[0]:
                best = (key, a, b)
        if best is None:
            raise _infeasible(i, d, alpha, "shortest")
        return _make_interval(best[1], best[2], i, d, policy)

    # Lower end shared by both equal-tail rules.
    if P[1] > half:
        raise _infeasible(i, d, alpha, "lower tail")
    a = bisect.bisect_right(P, half, lo=1, hi=m + 1) - 1
    shift = 0 if resolved == "equal_tail" else 1
    # smallest b with count(j >= b - shift) <= half
    lo_b = max(a, 1 + shift)
    b = None
    for cand in range(lo_b, m + 1):
        if total - P[cand - shift] <= half:
            b = cand
            break
    if b is None:
        raise _infeasible(i, d, alpha, "upper tail")
    out = _make_interval(a, b, i, d, policy)
    if out.event_coverage < 1 - alpha:
        raise _infeasible(i, d, alpha, "level")
    return out


@dataclass(frozen=True)
class ConfidenceSet:
    """Observed order statistic paired with a control-rank interval.

    ``arm`` names the arm whose observed order statistic is ``point``;
    ``"control"`` marks a set built with the arms exchanged.
    """

    i: int
    point: Outcome
    lower: Outcome
    upper: Outcome
    interval: RankInterval
    alpha: Fraction
    placement: DeathPlacement
    arm: str = "treated"

    def contains(self, w: Outcome) -> bool:
        p = self.placement
        return compare(self.lower, w, p) <= 0 <= compare(self.upper, w, p)


def confidence_set(
    obs: ObservedExperiment,
    i: int,
    alpha=0.05,
    p: DeathPlacement = DEFAULT_PLACEMENT,
    policy: str = "paper",
) -> ConfidenceSet:
    obs.require_both_arms()
    d = DesignCounts(obs.n, obs.m)
    if not 1 <= i <= d.n:
        raise RankOutOfRange(f"treated rank {i} outside 1..{d.n}")
    interval = find_interval(i, d, alpha, policy)
    treated = obs.sorted_arm(True, p)
    control = obs.sorted_arm(False, p)
    return ConfidenceSet(
        i=i,
        point=order_stat(treated, i),
        lower=order_stat(control, interval.a),
        upper=order_stat(control, interval.b),
        interval=interval,
        alpha=as_fraction(alpha),
        placement=p,
    )


def confidence_set_dual(
    obs: ObservedExperiment,
    j: int,
    alpha=0.05,
    p: DeathPlacement = DEFAULT_PLACEMENT,
    policy: str = "paper",
) -> ConfidenceSet:
    """Confidence set for the j-th control order statistic and its counterpart under treatment."""
    cs = confidence_set(obs.swapped(), j, alpha, p, policy)
    return replace(cs, arm="control")


class EffectCall(enum.Enum):
    TREATED_SUPERIOR = "TreatedSuperior"
    CONTROL_SUPERIOR = "ControlSuperior"
    EQUAL = "Equal"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


def classify(cs: ConfidenceSet, p: DeathPlacement | None = None) -> EffectCall:
    p = cs.placement if p is None else p
    if p != cs.placement:
        raise DomainError("confidence set was built under a different death placement")
    point_wins = EffectCall.TREATED_SUPERIOR
    point_loses = EffectCall.CONTROL_SUPERIOR
    if cs.arm == "control":
        point_wins, point_loses = point_loses, point_wins
    if compare(cs.point, cs.upper, p) == Ordering.GREATER:
        return point_wins
    if compare(cs.point, cs.lower, p) == Ordering.LESS:
        return point_loses
    if compare(cs.point, cs.lower, p) == Ordering.EQUAL and compare(cs.point, cs.upper, p) == Ordering.EQUAL:
        return EffectCall.EQUAL
    return EffectCall.INCONCLUSIVE


def parse_quantile(q) -> Fraction:
    if isinstance(q, str):
        q = q.strip()
    f = as_fraction(q)
    if not 0 < f < 1:
        raise DomainError(f"quantile must lie in (0, 1), got {q}")
    return f


def _lower_index(n: int, q: Fraction) -> int:
    x = q * (n + 1)
    return math.floor(x + Fraction(1, 2))


def quantile_indices(n: int, quantiles: Iterable) -> list[int]:
    """Treated ranks for quantile fractions.

    ``q <= 1/2`` rounds ``q(n+1)`` half up; ``q > 1/2`` mirrors the rank for
    ``1-q`` so that paired quantiles sum to ``n+1``. Ranks are clamped to 1..n.
    """
    if n < 1:
        raise DomainError("n must be positive")
    out = []
    for q in quantiles:
        f = parse_quantile(q)
        if f <= Fraction(1, 2):
            k = _lower_index(n, f)
        else:
            k = n + 1 - _lower_index(n, 1 - f)
        out.append(min(max(k, 1), n))
    return out
