"""Loading price series from CSV and turning them into return series."""
from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DegenerateInputError, DomainError, ParseError
from .model import ReturnSeries

__all__ = ["PriceSeries", "load_csv", "to_returns", "standardize", "write_csv"]

log = logging.getLogger(__name__)

_TRANSFORM_ALIASES = {"log": "log_diff", "log_diff": "log_diff", "diff": "diff"}


@dataclass
class PriceSeries:
    values: np.ndarray
    dates: list[dt.date] | None = None
    label: str = ""
    n_skipped: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size < 3:
            raise DegenerateInputError(f"price series needs at least 3 values, got {self.values.size}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("price series contains non-finite values")
        if self.dates is not None:
            if len(self.dates) != self.values.size:
                raise DomainError("dates and values differ in length")
            if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
                raise DomainError("dates must be strictly increasing")


def _number(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def _filled(row: list[str]) -> bool:
    return any(cell.strip() for cell in row)


def _resolve(spec, header: list[str] | None, what: str) -> int:
    if isinstance(spec, int):
        return spec
    if header is None:
        raise ParseError(f"{what} column {spec!r} given by name but the file has no header")
    try:
        return header.index(spec)
    except ValueError:
        raise ParseError(f"{what} column {spec!r} not found in header {header}", line=1) from None


def load_csv(
    path,
    column: int | str | None = None,
    date_column: int | str | None = None,
    delimiter: str = ",",
    header: bool | None = None,
    label: str | None = None,
) -> PriceSeries:
    """Read one numeric column of a CSV file.

    ``column`` defaults to the last column. ``header=None`` sniffs: the first
    row is a header when its value field is not numeric. Lines starting with
    ``#`` are comments. Blank rows and rows whose value is missing or
    non-numeric are skipped and counted in ``n_skipped``. A date that is
    present but not ISO-8601 raises :class:`ParseError`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [
            (n, row)
            for n, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1)
            if not (row and row[0].lstrip().startswith("#"))
        ]
    while rows and not _filled(rows[0][1]):
        rows.pop(0)
    if not rows:
        raise DegenerateInputError(f"{path}: file is empty")

    first = rows[0][1]
    col = -1 if column is None else column
    if header is None:
        idx = col if isinstance(col, int) else 0
        header = isinstance(col, str) or idx >= len(first) or _number(first[idx]) is None
    names = [c.strip() for c in first] if header else None
    body = rows[1:] if header else rows
    col = _resolve(col, names, "value")
    dcol = None if date_column is None else _resolve(date_column, names, "date")

    values, dates, skipped = [], [], 0
    for lineno, row in body:
        if not _filled(row):
            skipped += 1
            continue
        try:
            cell = row[col]
        except IndexError:
            skipped += 1
            continue
        value = _number(cell.strip())
        if value is None:
            skipped += 1
            continue
        if dcol is not None:
            try:
                dates.append(dt.date.fromisoformat(row[dcol].strip()))
            except (IndexError, ValueError):
                raise ParseError(f"bad date {row[dcol] if dcol < len(row) else ''!r}", line=lineno) from None
        values.append(value)
    if skipped:
        log.warning("%s: skipped %d rows with missing or non-numeric values", path, skipped)
    if not values:
        raise DegenerateInputError(f"{path}: no numeric values in column {column!r}")
    return PriceSeries(
        np.array(values),
        dates=dates if dcol is not None else None,
        label=label if label is not None else path.stem,
        n_skipped=skipped,
    )


def to_returns(p: PriceSeries, transform: str = "log_diff") -> ReturnSeries:
    """``log_diff``: r_t = ln p_t - ln p_{t-1}; ``diff``: r_t = p_t - p_{t-1}."""
    kind = _TRANSFORM_ALIASES.get(transform)
    if kind is None:
        raise DomainError(f"unknown transform {transform!r}; expected log_diff or diff")
    if kind == "log_diff":
        if np.any(p.values <= 0):
            raise DomainError("log returns need strictly positive prices")
        r = np.diff(np.log(p.values))
    else:
        r = np.diff(p.values)
    return ReturnSeries(r, transform=kind, label=p.label)


def standardize(r: ReturnSeries) -> ReturnSeries:
    """Divide by the population standard deviation (ddof=0); no demeaning."""
    sd = np.std(r.values)
    if not sd > 0:
        raise DegenerateInputError("cannot standardize a series with zero variance")
    return ReturnSeries(r.values / sd, transform=r.transform, standardized=True, label=r.label)


def write_csv(r: ReturnSeries, path, delimiter: str = ",", comments: list[str] | None = None) -> None:
    """Write a return series as a one-column CSV with header ``return``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        for line in comments or ():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(["return"])
        writer.writerows([repr(float(v))] for v in r.values)
