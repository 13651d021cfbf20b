"""Outcomes that may be a death, and the total orders that place death.

A quality-of-life outcome is either a finite score or a death ``D``. Scores
cannot be averaged with deaths, but once a position for ``D`` is fixed they
can be ranked. A :class:`DeathPlacement` fixes that position with a single
cut ``t``: a score ``q`` ranks above death iff ``q >= t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import DomainError, RankOutOfRange

__all__ = [
    "Death", "Quality", "Outcome", "DEATH",
    "DeathPlacement", "DEFAULT_PLACEMENT",
    "Ordering", "compare", "OrderedSample", "sort_outcomes", "order_stat",
    "format_outcome", "parse_cut",
]


@dataclass(frozen=True)
class Death:
    def __str__(self):
        return "D"


@dataclass(frozen=True)
class Quality:
    score: float
    # Original text of the score, used only for display.
    raw: str | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.score, bool) or not isinstance(self.score, (int, float)):
            raise DomainError(f"quality score must be a real number, got {self.score!r}")
        if not math.isfinite(self.score):
            raise DomainError(f"quality score must be finite, got {self.score!r}")

    def __str__(self):
        return self.raw if self.raw is not None else repr(float(self.score))


Outcome = Union[Death, Quality]

DEATH = Death()


def format_outcome(x: Outcome) -> str:
    return str(x)


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class DeathPlacement:
    """Cut point locating death among the quality scores.

    ``cut=-inf`` is the default view (death below every quality);
    ``cut=+inf`` puts death above every quality.
    """

    cut: float = -math.inf

    def __post_init__(self):
        if math.isnan(self.cut):
            raise DomainError("death placement cut may not be NaN")

    def key(self, x: Outcome) -> tuple[float, int]:
        # Death sorts immediately below a score equal to the cut.
        if isinstance(x, Death):
            return (self.cut, 0)
        return (x.score, 1)

    def label(self) -> str:
        if self.cut == -math.inf:
            return "-inf"
        if self.cut == math.inf:
            return "+inf"
        return repr(float(self.cut))

    def describe(self) -> str:
        if self.cut == -math.inf:
            return "D below every quality score"
        if self.cut == math.inf:
            return "D above every quality score"
        return f"q >= {self.label()} ranks above D; q < {self.label()} ranks below D"

    def __str__(self):
        return self.label()


DEFAULT_PLACEMENT = DeathPlacement()


def parse_cut(text: str) -> DeathPlacement:
    """Parse ``-inf``, ``+inf``/``inf`` or a decimal literal into a placement."""
    t = text.strip().lower()
    if t in ("-inf", "-infinity"):
        return DeathPlacement(-math.inf)
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return DeathPlacement(math.inf)
    try:
        value = float(t)
    except ValueError:
        raise DomainError(f"bad death placement {text!r}") from None
    if not math.isfinite(value):
        raise DomainError(f"bad death placement {text!r}")
    return DeathPlacement(value)


def compare(x: Outcome, y: Outcome, p: DeathPlacement = DEFAULT_PLACEMENT) -> Ordering:
    kx, ky = p.key(x), p.key(y)
    if kx < ky:
        return Ordering.LESS
    if kx > ky:
        return Ordering.GREATER
    return Ordering.EQUAL


@dataclass(frozen=True)
class OrderedSample:
    outcomes: tuple[Outcome, ...]
    indices: tuple[int, ...]
    placement: DeathPlacement = DEFAULT_PLACEMENT
    group: str | None = None

    def __len__(self):
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)


def sort_outcomes(
    xs: Sequence[Outcome],
    p: DeathPlacement = DEFAULT_PLACEMENT,
    indices: Iterable[int] | None = None,
    group: str | None = None,
) -> OrderedSample:
    """Stable ascending sort of ``xs`` under ``p``.

    ``indices`` are the subject indices carried alongside each outcome;
    they default to positions in ``xs``.
    """
    xs = list(xs)
    idx = list(range(len(xs))) if indices is None else list(indices)
    if len(idx) != len(xs):
        raise DomainError("indices and outcomes differ in length")
    order = sorted(range(len(xs)), key=lambda k: p.key(xs[k]))
    return OrderedSample(
        outcomes=tuple(xs[k] for k in order),
        indices=tuple(idx[k] for k in order),
        placement=p,
        group=group,
    )


def order_stat(s: OrderedSample, k: int) -> Outcome:
    """The ``k``-th smallest outcome (1-based)."""
    if not 1 <= k <= len(s.outcomes):
        raise RankOutOfRange(f"rank {k} outside 1..{len(s.outcomes)}")
    return s.outcomes[k - 1]
