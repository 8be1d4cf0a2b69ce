"""Price ingestion, log returns, rolling volatility, date alignment and scaling."""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, DataError

DEFAULT_WINDOW = 10

# Cumulative feature order for the feature-count axis of the sweep tables.
DEFAULT_FEATURE_ORDER = (
    "INDIAVIX",
    "NIFTYSDR",
    "CBOEVIX",
    "CRUDESDR",
    "DJIASDR",
    "DAXSDR",
    "HANGSDR",
    "NIKKEISDR",
    "GOLDSDR",
)


def _as_dates(dates) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]")


def _check_dates(name, dates):
    if dates.ndim != 1:
        raise DataError(f"series {name!r}: dates must be one-dimensional")
    if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
        raise DataError(f"series {name!r}: dates must be strictly increasing")


@dataclass(frozen=True)
class PriceSeries:
    name: str
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape:
            raise DataError(f"series {self.name!r}: dates and values differ in length")
        _check_dates(self.name, dates)
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DataError(f"series {self.name!r}: prices must be finite and > 0")
        dates.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class ReturnSeries:
    name: str
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape:
            raise DataError(f"series {self.name!r}: dates and values differ in length")
        _check_dates(self.name, dates)
        if not np.all(np.isfinite(values)):
            raise DataError(f"series {self.name!r}: returns must be finite")
        dates.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class VolatilitySeries:
    name: str
    window: int
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape:
            raise DataError(f"series {self.name!r}: dates and values differ in length")
        _check_dates(self.name, dates)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DataError(f"series {self.name!r}: volatilities must be finite and >= 0")
        dates.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


DatedSeries = Union[PriceSeries, ReturnSeries, VolatilitySeries]


class FeatureKind(str, Enum):
    LEVEL = "level"
    VOLATILITY = "volatility"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: FeatureKind
    path: Path | None = None


@dataclass(frozen=True)
class FeatureCatalog:
    """Ordered feature definitions; order drives the cumulative feature axis."""

    entries: tuple[CatalogEntry, ...]
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate feature names in catalog: {names}")
        if self.window < 2:
            raise ConfigError("volatility window must be >= 2")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def reordered(self, order: Sequence[str]) -> "FeatureCatalog":
        by_name = {e.name: e for e in self.entries}
        missing = [n for n in order if n not in by_name]
        if missing:
            raise ConfigError(f"feature order names unknown features: {missing}")
        rest = [e for e in self.entries if e.name not in set(order)]
        return FeatureCatalog(tuple(by_name[n] for n in order) + tuple(rest), self.window)


@dataclass(frozen=True)
class FeatureMatrix:
    """n dated observations x p named features."""

    dates: np.ndarray
    names: tuple[str, ...]
    values: np.ndarray
    standardized: bool = False
    means: np.ndarray | None = field(default=None, compare=False)
    stds: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        names = tuple(self.names)
        if values.ndim != 2 or values.shape[0] != dates.size or values.shape[1] != len(names):
            raise DataError(
                f"feature matrix shape {values.shape} inconsistent with "
                f"{dates.size} dates and {len(names)} names"
            )
        if len(names) < 1:
            raise DataError("feature matrix needs at least one feature")
        if len(set(names)) != len(names):
            raise DataError(f"duplicate feature names: {names}")
        if not np.all(np.isfinite(values)):
            raise DataError("feature matrix contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        idx = []
        for name in names:
            try:
                idx.append(self.names.index(name))
            except ValueError:
                raise ConfigError(f"feature {name!r} not in matrix {self.names}") from None
        return FeatureMatrix(
            self.dates,
            tuple(names),
            self.values[:, idx],
            self.standardized,
            None if self.means is None else self.means[idx],
            None if self.stds is None else self.stds[idx],
        )

    def prefix(self, f: int) -> "FeatureMatrix":
        if not 1 <= f <= self.p:
            raise ConfigError(f"feature count {f} outside [1, {self.p}]")
        return self.select(self.names[:f])


def _parse_date(text, source, line):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"invalid ISO date {text!r}", source=source, line=line) from None


def parse_price_csv(raw, name: str, source=None) -> PriceSeries:
    """Parse a ``date,close`` CSV (bytes, text or binary/text stream).

    Extra columns are ignored. Rows are returned sorted by date.
    """
    if hasattr(raw, "read"):
        raw = raw.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise DataError(f"not UTF-8 text ({exc})", source=source) from None
    reader = csv.reader(io.StringIO(raw))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty file, header row required", source=source) from None
    header = [h.strip().lower() for h in header]
    if "date" not in header or "close" not in header:
        raise DataError("header must contain 'date' and 'close' columns", source=source, line=1)
    i_date, i_close = header.index("date"), header.index("close")

    dates, closes, lines = [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(
                f"expected {len(header)} fields, got {len(row)}", source=source, line=line
            )
        d = _parse_date(row[i_date], source, line)
        try:
            close = float(row[i_close])
        except ValueError:
            raise DataError(f"non-numeric close {row[i_close]!r}", source=source, line=line) from None
        if not math.isfinite(close) or close <= 0:
            raise DataError(f"close must be finite and > 0, got {row[i_close]!r}", source=source, line=line)
        dates.append(d)
        closes.append(close)
        lines.append(line)

    if not dates:
        raise DataError("no data rows", source=source)
    order = sorted(range(len(dates)), key=dates.__getitem__)
    for a, b in zip(order, order[1:]):
        if dates[a] == dates[b]:
            raise DataError(f"duplicate date {dates[b].isoformat()}", source=source, line=max(lines[a], lines[b]))
    return PriceSeries(name, [dates[i] for i in order], [closes[i] for i in order])


def read_price_csv(path, name: str | None = None) -> PriceSeries:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read price file ({exc.strerror})", source=path) from None
    return parse_price_csv(raw, name or path.stem, source=path)


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """r_t = ln(P_t / P_{t-1}), dated at the later observation."""
    if len(prices) < 2:
        raise DataError(f"series {prices.name!r}: need at least 2 prices for returns")
    v = prices.values
    return ReturnSeries(prices.name, prices.dates[1:], np.log(v[1:] / v[:-1]))


def rolling_volatility(returns: ReturnSeries, window: int = DEFAULT_WINDOW, name: str | None = None) -> VolatilitySeries:
    """Trailing sample standard deviation (divisor ``window - 1``)."""
    if window < 2:
        raise ConfigError("volatility window must be >= 2")
    if len(returns) < window:
        raise DataError(
            f"series {returns.name!r}: window {window} larger than {len(returns)} returns"
        )
    windows = np.lib.stride_tricks.sliding_window_view(returns.values, window)
    vol = windows.std(axis=1, ddof=1)
    return VolatilitySeries(name or returns.name, window, returns.dates[window - 1:], vol)


def align(series: Sequence[DatedSeries]) -> FeatureMatrix:
    """Inner-join series on date; columns follow input order."""
    if not series:
        raise DataError("align needs at least one series")
    common = reduce(np.intersect1d, (s.dates for s in series))
    if common.size == 0:
        raise DataError("series share no common dates")
    cols = []
    for s in series:
        idx = np.searchsorted(s.dates, common)
        cols.append(s.values[idx])
    return FeatureMatrix(common, tuple(s.name for s in series), np.column_stack(cols))


def standardize(m: FeatureMatrix) -> FeatureMatrix:
    """Column z-scores using the sample std (ddof=1)."""
    if m.n < 2:
        raise DataError("standardization needs at least 2 rows")
    means = m.values.mean(axis=0)
    stds = m.values.std(axis=0, ddof=1)
    constant = [name for name, s in zip(m.names, stds) if not s > 0]
    if constant:
        raise DataError(f"constant column(s) cannot be standardized: {', '.join(constant)}")
    z = (m.values - means) / stds
    return FeatureMatrix(m.dates, m.names, z, True, means, stds)


def build_features(catalog: FeatureCatalog) -> FeatureMatrix:
    """Load every catalog file, derive volatilities, align. Not standardized."""
    series = []
    for entry in catalog.entries:
        if entry.path is None:
            raise ConfigError(f"catalog entry {entry.name!r} has no file path")
        prices = read_price_csv(entry.path, entry.name)
        if entry.kind is FeatureKind.LEVEL:
            series.append(prices)
        else:
            series.append(rolling_volatility(log_returns(prices), catalog.window))
    return align(series)


def write_feature_csv(m: FeatureMatrix, path) -> None:
    lines = ["date," + ",".join(m.names)]
    for d, row in zip(m.dates, m.values):
        lines.append(str(d) + "," + ",".join(f"{v:.10g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_feature_csv(path, standardized: bool | None = None) -> FeatureMatrix:
    """Read a ``date,<f1>,...`` matrix.

    When ``standardized`` is None the flag is inferred from the column moments.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read feature matrix ({exc.strerror})", source=path) from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0].strip().lower() != "date" or len(header) < 2:
        raise DataError("header must be 'date,<feature>,...'", source=path, line=1)
    names = tuple(h.strip() for h in header[1:])
    dates, rows = [], []
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, got {len(row)}", source=path, line=line)
        dates.append(_parse_date(row[0], path, line))
        try:
            rows.append([float(v) for v in row[1:]])
        except ValueError:
            raise DataError("non-numeric feature value", source=path, line=line) from None
    if not rows:
        raise DataError("no data rows", source=path)
    values = np.array(rows)
    if standardized is None:
        standardized = bool(
            values.shape[0] > 1
            and np.allclose(values.mean(axis=0), 0, atol=1e-6)
            and np.allclose(values.std(axis=0, ddof=1), 1, atol=1e-6)
        )
    try:
        return FeatureMatrix(dates, names, values, standardized)
    except DataError as exc:
        raise DataError(str(exc), source=path) from None


def date_span(m: FeatureMatrix) -> tuple[str, str]:
    return str(m.dates[0]), str(m.dates[-1])

