"""Analysis reports across quantiles and death placements."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import QolciError, IntervalInfeasible
from .exact import (
    PAPER_POLICY_NOTE,
    ConfidenceSet,
    EffectCall,
    as_fraction,
    classify,
    confidence_set,
    format_probability,
    parse_quantile,
    quantile_indices,
    resolve_policy,
)
from .experiment import ObservedExperiment
from .ordering import DeathPlacement, format_outcome

SCHEMA_VERSION = 1
DEFAULT_QUANTILES = ("1/8", "1/4", "1/2", "3/4", "7/8")


@dataclass
class ReportRow:
    placement: DeathPlacement
    quantile: str
    i: int
    cs: ConfidenceSet | None = None
    call: EffectCall | None = None
    error: str | None = None
    max_event_coverage: Fraction | None = None

    @property
    def infeasible(self) -> bool:
        return self.error is not None and self.max_event_coverage is not None

    def to_dict(self) -> dict:
        d = {
            "placement": self.placement.label(),
            "quantile": self.quantile,
            "i": self.i,
        }
        if self.cs is None:
            d["error"] = self.error
            if self.max_event_coverage is not None:
                d["max_event_coverage"] = format_probability(self.max_event_coverage)
            return d
        iv = self.cs.interval
        d.update({
            "a": iv.a,
            "b": iv.b,
            "eq1_coverage": iv.printed_decimal,
            "event_coverage": iv.event_decimal,
            "eq1_exceeds_event": iv.printed_coverage != iv.event_coverage,
            "point": format_outcome(self.cs.point),
            "lower": format_outcome(self.cs.lower),
            "upper": format_outcome(self.cs.upper),
            "call": str(self.call),
        })
        return d


@dataclass
class AnalysisReport:
    N: int
    n: int
    m: int
    alpha: Fraction
    policy: str
    placements: list[DeathPlacement]
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def notes(self) -> list[str]:
        out = ["placement t: quality q ranks above D iff q >= t; t=-inf puts D below every quality"]
        if self.policy == "paper":
            out.append(PAPER_POLICY_NOTE)
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "analysis",
            "design": {"N": self.N, "n": self.n, "m": self.m},
            "alpha": format_probability(self.alpha),
            "level": format_probability(1 - self.alpha),
            "policy": self.policy,
            "resolved_policy": resolve_policy(self.policy),
            "placements": [
                {"cut": p.label(), "semantics": p.describe()} for p in self.placements
            ],
            "notes": self.notes,
            "rows": [r.to_dict() for r in self.rows],
        }

    @property
    def any_infeasible(self) -> bool:
        return any(r.infeasible for r in self.rows)


def analyze(
    obs: ObservedExperiment,
    alpha=0.05,
    placements: Sequence[DeathPlacement] = (DeathPlacement(),),
    quantiles: Sequence = DEFAULT_QUANTILES,
    policy: str = "paper",
) -> AnalysisReport:
    obs.require_both_arms()
    resolve_policy(policy)
    alpha = as_fraction(alpha)
    labels = [str(parse_quantile(q)) for q in quantiles]
    ranks = quantile_indices(obs.n, quantiles)
    report = AnalysisReport(obs.N, obs.n, obs.m, alpha, policy, list(placements))
    for p in placements:
        for label, i in zip(labels, ranks):
            row = ReportRow(p, label, i)
            try:
                row.cs = confidence_set(obs, i, alpha, p, policy)
                row.call = classify(row.cs, p)
            except IntervalInfeasible as exc:
                row.error = str(exc)
                row.max_event_coverage = exc.max_event_coverage
            except QolciError as exc:
                row.error = str(exc)
            report.rows.append(row)
    return report


def render_json(report_dict: dict) -> str:
    return json.dumps(report_dict, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


_TABLE_COLUMNS = ["placement", "quantile", "i", "a", "b", "eq1_coverage", "event_coverage",
                  "point", "lower", "upper", "call"]


def _cells(row: dict) -> list[str]:
    if "error" in row:
        return [row["placement"], row["quantile"], str(row["i"])] + ["-"] * 7 + ["ERROR: " + row["error"]]
    return [str(row[c]) for c in _TABLE_COLUMNS]


def render_table(report_dict: dict) -> str:
    d = report_dict
    lines = [
        f"design: N={d['design']['N']} n={d['design']['n']} m={d['design']['m']}  "
        f"alpha={d['alpha']}  policy={d['policy']} ({d['resolved_policy']})",
    ]
    for p in d["placements"]:
        lines.append(f"placement {p['cut']}: {p['semantics']}")
    for note in d["notes"]:
        lines.append(f"note: {note}")
    rows = [_TABLE_COLUMNS] + [_cells(r) for r in d["rows"]]
    widths = [max(len(r[k]) for r in rows if k < len(r)) for k in range(len(_TABLE_COLUMNS) - 1)]
    lines.append("")
    for r in rows:
        head = "  ".join(c.ljust(w) for c, w in zip(r, widths))
        lines.append((head + "  " + r[-1]).rstrip())
    return "\n".join(lines) + "\n"


def render_csv(report_dict: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_TABLE_COLUMNS + ["error"])
    for r in report_dict["rows"]:
        if "error" in r:
            w.writerow([r["placement"], r["quantile"], r["i"]] + [""] * 8 + [r["error"]])
        else:
            w.writerow([r[c] for c in _TABLE_COLUMNS] + [""])
    return buf.getvalue()
