"""CSV ingestion and descriptive statistics of claim series.

Accepted layout: UTF-8, one header row, an optional leading ``date``
column, then numeric claim columns (for example
``date,building,contents,profits`` or ``x1,...,xd``).  Amounts are stored
in millions; files in raw currency units are scaled by 1e-6 on load.
"""

from __future__ import annotations

import csv
import itertools
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, ParseError
from .comb_bernoulli import ClaimSeries, all_subsets, subset_label

UNIT_SCALE = {"millions": 1.0, "dkk": 1e-6}
DANISH_ENV = "COMBFIT_DANISH"
DANISH_COLUMNS = ("building", "contents", "profits")


def danish_fixture_path() -> Path:
    """Location of the daily Danish fire claims CSV.

    ``$COMBFIT_DANISH`` wins; otherwise the copy under ``combfit/data``.
    Raises FileNotFoundError naming both places when neither exists.
    """
    env = os.environ.get(DANISH_ENV)
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).with_name("data") / "danish.csv")
    for c in candidates:
        if c.is_file():
            return c
    raise FileNotFoundError(
        "Danish fire claims fixture not found; set $COMBFIT_DANISH or create "
        f"{candidates[-1]} with scripts/prepare_danish.py"
    )


def load_claims(
    path,
    unit: str = "millions",
    columns: Sequence[str] | None = None,
    date_column: str | None = "auto",
) -> ClaimSeries:
    """Read a claim CSV into a :class:`ClaimSeries` (values in millions).

    ``date_column="auto"`` treats a first column named ``date`` as labels;
    pass a name to force one or ``None`` to read every column as claims.
    Missing cells and ragged rows raise ParseError; negative amounts raise
    DomainError naming the data row (0-based).
    """
    if unit not in UNIT_SCALE:
        raise ParseError(f"unknown unit {unit!r}; expected one of {sorted(UNIT_SCALE)}")
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8 text") from exc
    if not rows:
        raise ParseError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise ParseError(f"{path} has a header but no data rows")
    width = len(header)
    for k, r in enumerate(body):
        if len(r) != width:
            raise ParseError(f"row {k} has {len(r)} fields, header has {width}")
    lower = [h.lower() for h in header]
    if date_column == "auto":
        date_idx = 0 if lower[0] == "date" else None
    elif date_column is None:
        date_idx = None
    else:
        if date_column.lower() not in lower:
            raise ParseError(f"date column {date_column!r} not in header")
        date_idx = lower.index(date_column.lower())
    claim_idx = [i for i in range(width) if i != date_idx]
    if columns is not None:
        wanted = [c.strip().lower() for c in columns]
        missing = [c for c in wanted if c not in lower]
        if missing:
            raise ParseError(f"columns {missing} not in header {header}")
        claim_idx = [lower.index(c) for c in wanted]
    if not claim_idx:
        raise ParseError("no claim columns")
    values = np.empty((len(body), len(claim_idx)))
    for k, r in enumerate(body):
        for j, i in enumerate(claim_idx):
            cell = r[i].strip()
            if cell == "":
                raise ParseError(f"missing value at row {k}, column {header[i]!r}")
            try:
                values[k, j] = float(cell)
            except ValueError as exc:
                raise ParseError(f"non-numeric value {cell!r} at row {k}, column {header[i]!r}") from exc
    if not np.all(np.isfinite(values)):
        raise ParseError("non-finite claim amount")
    neg = np.argwhere(values < 0)
    if neg.size:
        raise DomainError(f"negative claim at row {neg[0][0]}, column {header[claim_idx[neg[0][1]]]!r}")
    dates = tuple(r[date_idx].strip() for r in body) if date_idx is not None else None
    return ClaimSeries(values * UNIT_SCALE[unit], tuple(header[i] for i in claim_idx), dates)


def write_claims(path, series: ClaimSeries, unit: str = "millions") -> None:
    """Write a series as CSV; values round-trip exactly through repr."""
    scale = 1.0 / UNIT_SCALE[unit]
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        head = (["date"] if series.dates is not None else []) + list(series.labels)
        w.writerow(head)
        for k, row in enumerate(series.values):
            cells = [repr(float(v * scale)) for v in row]
            w.writerow(([series.dates[k]] if series.dates is not None else []) + cells)


@dataclass(frozen=True)
class ColumnStats:
    label: str
    n_positive: int
    share: float
    mean: float
    min: float
    max: float


@dataclass(frozen=True)
class DatasetSummary:
    """Counts and moments of a claim series (amounts in millions)."""

    n_days: int
    columns: tuple[ColumnStats, ...]
    cojumps: np.ndarray
    nojumps: np.ndarray
    all_cojumps: int
    all_nojumps: int
    exact_counts: dict[tuple[int, ...], int]

    def to_dict(self) -> dict:
        labels = [c.label for c in self.columns]
        pairs = {}
        for i, j in itertools.combinations(range(len(labels)), 2):
            pairs[f"{labels[i]},{labels[j]}"] = {
                "cojumps": int(self.cojumps[i, j]),
                "nojumps": int(self.nojumps[i, j]),
            }
        return {
            "n_days": self.n_days,
            "columns": [
                {
                    "label": c.label,
                    "n_positive": c.n_positive,
                    "share": c.share,
                    "mean": c.mean,
                    "min": c.min,
                    "max": c.max,
                }
                for c in self.columns
            ],
            "pairs": pairs,
            "all_cojumps": self.all_cojumps,
            "all_nojumps": self.all_nojumps,
            "exact_counts": {subset_label(S): n for S, n in self.exact_counts.items()},
        }


def summarize(series: ClaimSeries) -> DatasetSummary:
    """Per-column positives and moments, pairwise and joint (no-)jump counts."""
    X = series.values
    N, d = X.shape
    pos = X > 0
    cols = []
    for j in range(d):
        v = X[pos[:, j], j]
        cols.append(
            ColumnStats(
                label=series.labels[j],
                n_positive=int(v.size),
                share=v.size / N,
                mean=float(v.mean()) if v.size else float("nan"),
                min=float(v.min()) if v.size else float("nan"),
                max=float(v.max()) if v.size else float("nan"),
            )
        )
    P = pos.astype(np.int64)
    Z = (~pos).astype(np.int64)
    keys = pos @ (1 << np.arange(d))
    counts = np.bincount(keys, minlength=1 << d)
    exact = {S: int(counts[sum(1 << i for i in S)]) for S in all_subsets(d)}
    return DatasetSummary(
        n_days=N,
        columns=tuple(cols),
        cojumps=P.T @ P,
        nojumps=Z.T @ Z,
        all_cojumps=int(np.sum(np.all(pos, axis=1))),
        all_nojumps=int(np.sum(~np.any(pos, axis=1))),
        exact_counts=exact,
    )
