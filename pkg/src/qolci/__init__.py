"""Exact randomization confidence sets for quantiles of outcomes censored by death."""

from .errors import (
    BudgetExceeded,
    DataError,
    DomainError,
    EmptyArm,
    IntervalInfeasible,
    MalformedRow,
    MissingQol,
    QolOnDead,
    RankOutOfRange,
)
from .ordering import DEATH, Death, DeathPlacement, Quality, compare, order_stat, sort_outcomes
from .exact import (
    DesignCounts,
    EffectCall,
    classify,
    confidence_set,
    confidence_set_dual,
    eq1_coverage,
    event_coverage,
    find_interval,
    fw_pmf,
    quantile_indices,
)
from .experiment import ObservedExperiment, PotentialOutcomes, observe, randomize

__version__ = "0.1.0"
