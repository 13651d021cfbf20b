"""Exception hierarchy shared by every module."""


class QolciError(Exception):
    """Base class for errors raised by this package."""


class DomainError(QolciError, ValueError):
    """An argument lies outside the domain of the operation."""


class RankOutOfRange(DomainError, IndexError):
    """An order-statistic rank is outside ``1..len(sample)``."""


class EmptyArm(DomainError):
    """An experiment has no subjects in one of its arms."""


class IntervalInfeasible(QolciError):
    """No rank interval reaches the requested coverage.

    ``max_event_coverage`` is the closed-interval coverage of the widest
    interval ``(1, m)``; ``max_eq1_coverage`` is the printed-formula sum over
    the same interval.
    """

    def __init__(self, message, max_event_coverage, max_eq1_coverage):
        super().__init__(message)
        self.max_event_coverage = max_event_coverage
        self.max_eq1_coverage = max_eq1_coverage


class BudgetExceeded(QolciError):
    """Exhaustive enumeration would visit more assignments than allowed."""


class DataError(QolciError):
    """Input data could not be parsed."""


class MalformedRow(DataError):
    def __init__(self, row, reason):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class QolOnDead(MalformedRow):
    pass


class MissingQol(MalformedRow):
    pass
