"""CSV ingestion and serialization.

Observed data: header ``id,arm,status,qol``; ``arm`` is ``T`` or ``C``,
``status`` is ``alive`` or ``dead``, and ``qol`` is present iff alive.

Populations of potential outcomes: header
``id,status_t,qol_t,status_c,qol_c`` with the same rules per arm.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .errors import DataError, MalformedRow, MissingQol, QolOnDead
from .experiment import ObservedExperiment, PotentialOutcomes
from .ordering import DEATH, Outcome, Quality

DATASET_HEADER = ["id", "arm", "status", "qol"]
POPULATION_HEADER = ["id", "status_t", "qol_t", "status_c", "qol_c"]


def _parse_outcome(status: str, qol: str, rownum: int) -> Outcome:
    status = (status or "").strip().lower()
    qol = (qol or "").strip()
    if status == "dead":
        if qol:
            raise QolOnDead(rownum, f"dead subject has qol {qol!r}")
        return DEATH
    if status != "alive":
        raise MalformedRow(rownum, f"status must be 'alive' or 'dead', got {status!r}")
    if not qol:
        raise MissingQol(rownum, "alive subject has no qol")
    try:
        value = float(qol)
    except ValueError:
        raise MalformedRow(rownum, f"qol {qol!r} is not a number") from None
    if not math.isfinite(value):
        raise MalformedRow(rownum, f"qol {qol!r} is not finite")
    return Quality(value, qol)


def _outcome_fields(x: Outcome) -> tuple[str, str]:
    if x is DEATH or not isinstance(x, Quality):
        return "dead", ""
    return "alive", str(x)


def _rows(text: str, header: list[str]):
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise DataError("empty file") from None
    if [h.strip().lower() for h in first] != header:
        raise MalformedRow(1, f"header must be {','.join(header)}, got {','.join(first)}")
    for rownum, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        # A trailing empty qol may be dropped by some writers.
        if len(row) == len(header) - 1:
            row = row + [""]
        if len(row) != len(header):
            raise MalformedRow(rownum, f"expected {len(header)} fields, got {len(row)}")
        yield rownum, row


def sniff_header(path) -> list[str]:
    with open(path, newline="") as fh:
        first = next(csv.reader(fh), [])
    return [h.strip().lower() for h in first]


def parse_dataset(text: str) -> ObservedExperiment:
    z, outcomes, ids, seen = [], [], [], set()
    for rownum, (sid, arm, status, qol) in _rows(text, DATASET_HEADER):
        sid = sid.strip()
        if not sid:
            raise MalformedRow(rownum, "empty id")
        if sid in seen:
            raise MalformedRow(rownum, f"duplicate id {sid!r}")
        seen.add(sid)
        arm = arm.strip().upper()
        if arm not in ("T", "C"):
            raise MalformedRow(rownum, f"arm must be T or C, got {arm!r}")
        z.append(1 if arm == "T" else 0)
        outcomes.append(_parse_outcome(status, qol, rownum))
        ids.append(sid)
    if not z:
        raise DataError("no data rows")
    return ObservedExperiment(tuple(z), tuple(outcomes), tuple(ids))


def ingest_csv(path) -> ObservedExperiment:
    return parse_dataset(Path(path).read_text())


def format_dataset(obs: ObservedExperiment) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DATASET_HEADER)
    ids = obs.ids or tuple(f"s{k + 1}" for k in range(obs.N))
    for sid, zi, x in zip(ids, obs.z, obs.outcomes):
        status, qol = _outcome_fields(x)
        w.writerow([sid, "T" if zi else "C", status, qol])
    return buf.getvalue()


def write_dataset(obs: ObservedExperiment, path) -> None:
    Path(path).write_text(format_dataset(obs))


def parse_population(text: str) -> PotentialOutcomes:
    subjects, ids = [], []
    for rownum, (sid, st, qt, sc, qc) in _rows(text, POPULATION_HEADER):
        subjects.append((_parse_outcome(st, qt, rownum), _parse_outcome(sc, qc, rownum)))
        ids.append(sid.strip())
    if len(subjects) < 2:
        raise DataError("a population needs at least two rows")
    return PotentialOutcomes(tuple(subjects), tuple(ids))


def read_population(path) -> PotentialOutcomes:
    return parse_population(Path(path).read_text())


def format_population(pop: PotentialOutcomes) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POPULATION_HEADER)
    for sid, (rt, rc) in zip(pop.subject_ids(), pop.subjects):
        w.writerow([sid, *_outcome_fields(rt), *_outcome_fields(rc)])
    return buf.getvalue()


def write_population(pop: PotentialOutcomes, path) -> None:
    Path(path).write_text(format_population(pop))
