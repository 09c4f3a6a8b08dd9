"""CSV ingestion, log-returns, and pairwise date alignment.

Raw series are daily level observations (attention index, price). The
loader validates positivity and date uniqueness, sorts by date, and the
return transform is the plain log-increment with no detrending.
"""

from __future__ import annotations

import csv
import datetime as dt
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class RawSeries:
    """Positive level observations on an increasing calendar-date grid."""

    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if len(self.dates) != values.size:
            raise DataError("dates and values have different lengths")
        if np.any(~np.isfinite(values)) or np.any(values <= 0):
            raise DataError("all values must be positive finite reals")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise DataError(f"dates not strictly increasing at {b}")

    def __len__(self):
        return self.values.size

    def gap_days(self) -> list[dt.date]:
        """Dates after which the nominal one-day step is broken."""
        return [a for a, b in zip(self.dates, self.dates[1:])
                if (b - a).days != 1]


@dataclass(frozen=True)
class ReturnSeries:
    """Equidistant log-increments D_k with their grid step."""

    delta: float
    returns: np.ndarray
    dates: tuple[dt.date, ...] = field(default=())

    def __post_init__(self):
        if not (self.delta > 0):
            raise DataError("delta must be positive")
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        if self.dates and len(self.dates) != returns.size:
            raise DataError("per-return dates must match the return count")

    def __len__(self):
        return self.returns.size

    @property
    def n(self) -> int:
        return self.returns.size


@dataclass(frozen=True)
class AlignedPair:
    """Attention and price returns restricted to a common date grid.

    ``dates`` is the shared level grid; returns correspond to dates[1:].
    """

    attention: ReturnSeries
    price: ReturnSeries
    dates: tuple[dt.date, ...]

    def __post_init__(self):
        if len(self.attention) != len(self.price):
            raise DataError("aligned series must have equal length")
        if len(self.dates) != len(self.attention) + 1:
            raise DataError("date grid must be one longer than the returns")


def load_csv(path, date_column: str = "date", value_column: str = "value") -> RawSeries:
    """Load a ``date,value`` CSV (ISO-8601 dates, one header row, UTF-8).

    Rows are sorted by date before validation. Errors carry the 1-based
    data row number of the offending record.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, expected a header row")
        missing = {date_column, value_column} - set(reader.fieldnames)
        if missing:
            raise DataError(f"{path}: missing column(s) {sorted(missing)}")
        rows = []
        for k, rec in enumerate(reader, start=1):
            try:
                date = dt.date.fromisoformat(rec[date_column].strip())
            except (ValueError, AttributeError) as exc:
                raise DataError(f"{path}: unparseable date at row {k}") from exc
            try:
                value = float(rec[value_column])
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}: unparseable value at row {k}") from exc
            if not np.isfinite(value) or value <= 0:
                raise DataError(f"{path}: non-positive value at row {k}"
                                " (pre-floor zeros at 1 if this is a 0-100 index)")
            rows.append((date, value, k))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    for (d1, _, k1), (d2, _, k2) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DataError(f"{path}: duplicate date {d1} (rows {k1} and {k2})")
    dates = tuple(r[0] for r in rows)
    values = np.array([r[1] for r in rows])
    return RawSeries(dates=dates, values=values)


def log_returns(series: RawSeries, delta: float = 1.0) -> ReturnSeries:
    """Log-increments of a level series: D_k = log v_k - log v_{k-1}."""
    if len(series) < 2:
        raise DataError("need at least 2 observations to form returns")
    gaps = series.gap_days()
    if gaps:
        warnings.warn(f"{len(gaps)} gap(s) in the date grid; increments span "
                      "more than the declared step there", stacklevel=2)
    logs = np.log(series.values)
    return ReturnSeries(delta=delta, returns=np.diff(logs),
                        dates=series.dates[1:])


def align(a: RawSeries, b: RawSeries, delta: float = 1.0) -> AlignedPair:
    """Restrict two level series to their common dates and form returns.

    Dates missing from either series are dropped from both; if that
    breaks the equidistant daily grid a warning is emitted.
    """
    common = sorted(set(a.dates) & set(b.dates))
    if len(common) < 2:
        raise DataError("date intersection too small to form returns")
    dropped = (len(a) - len(common)) + (len(b) - len(common))
    idx_a = {d: i for i, d in enumerate(a.dates)}
    idx_b = {d: i for i, d in enumerate(b.dates)}
    va = a.values[[idx_a[d] for d in common]]
    vb = b.values[[idx_b[d] for d in common]]
    sub_a = RawSeries(dates=tuple(common), values=va)
    sub_b = RawSeries(dates=tuple(common), values=vb)
    if dropped and sub_a.gap_days():
        warnings.warn(f"alignment dropped {dropped} row(s), leaving gaps in "
                      "the common grid", stacklevel=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # gap warning already issued once
        ra = log_returns(sub_a, delta)
        rb = log_returns(sub_b, delta)
    return AlignedPair(attention=ra, price=rb, dates=tuple(common))


def write_returns_csv(path, series: ReturnSeries) -> None:
    """Persist a return series as ``index,delta,return`` (1-based index)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "delta", "return"])
        for k, r in enumerate(series.returns, start=1):
            writer.writerow([k, repr(float(series.delta)), repr(float(r))])


def read_returns_csv(path) -> ReturnSeries:
    """Read a return series written by :func:`write_returns_csv`."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"delta", "return"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns index,delta,return")
        deltas, rets = [], []
        for k, rec in enumerate(reader, start=1):
            try:
                deltas.append(float(rec["delta"]))
                rets.append(float(rec["return"]))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}: unparseable row {k}") from exc
    if not rets:
        raise DataError(f"{path}: no data rows")
    if len(set(deltas)) != 1:
        raise DataError(f"{path}: delta column is not constant")
    return ReturnSeries(delta=deltas[0], returns=np.array(rets))
