import itertools
from fractions import Fraction

import pytest


def brute_pmf(N, n, i):
    """Distribution of the number of controls below the i-th smallest treated rank.

    Enumerates every treated subset of the distinct ranks 0..N-1 directly.
    """
    m = N - n
    counts = [0] * (m + 1)
    for treated in itertools.combinations(range(N), n):
        target = sorted(treated)[i - 1]
        j = sum(1 for r in range(target) if r not in treated)
        counts[j] += 1
    total = sum(counts)
    return [Fraction(c, total) for c in counts]


def pascal_rows(upto):
    """Binomial coefficients by Pascal's rule, independent of math.comb."""
    rows = [[1]]
    for u in range(1, upto + 1):
        prev = rows[-1]
        rows.append([1] + [prev[k - 1] + prev[k] for k in range(1, u)] + [1])
    return rows


@pytest.fixture(scope="session")
def pascal650():
    return pascal_rows(650)


_ACCEPTANCE = []


def record(criterion, ok, detail):
    """Log one acceptance line; ``ok=None`` marks an informational line."""
    status = "INFO" if ok is None else ("PASS" if ok else "FAIL")
    _ACCEPTANCE.append(f"[{status}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)
