"""Seeded synthetic market data standing in for the 2013-2014 daily series.

A persistent three-state volatility regime drives a common log-volatility
factor; every market's returns load on it, and the two VIX-style level
series track it with their own noise. Each series trades on a shared
calendar minus its own local holidays, so alignment has real work to do.

Run ``python -m volclust.synthetic DIR`` to regenerate the bundled fixture.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .data_pipeline import DEFAULT_WINDOW, PriceSeries

START, END = "2013-01-01", "2015-01-01"
FIXTURE_SEED = 2013

# name: (kind, start level, base daily vol, loading on common factor, local holidays)
SERIES = {
    "INDIAVIX": ("level", 14.0, None, None, 1),
    "NIFTYSDR": ("volatility", 5900.0, 0.011, 1.0, 6),
    "CBOEVIX": ("level", 14.5, None, None, 1),
    "CRUDESDR": ("volatility", 92.0, 0.014, 0.6, 1),
    "DJIASDR": ("volatility", 13100.0, 0.008, 0.9, 2),
    "DAXSDR": ("volatility", 7700.0, 0.011, 0.9, 1),
    "HANGSDR": ("volatility", 22600.0, 0.010, 0.8, 2),
    "NIKKEISDR": ("volatility", 10600.0, 0.014, 0.7, 2),
    "GOLDSDR": ("volatility", 1650.0, 0.010, 0.4, 1),
}
_SHARED_HOLIDAYS = 22
_REGIME_LEVEL = np.array([-0.45, 0.0, 0.65])
_REGIME_STAY = 0.985


def trading_calendar(rng) -> np.ndarray:
    days = np.arange(np.datetime64(START), np.datetime64(END), dtype="datetime64[D]")
    weekdays = days[np.is_busday(days)]
    drop = rng.choice(weekdays.size, size=_SHARED_HOLIDAYS, replace=False)
    return np.delete(weekdays, drop)


def _regimes(rng, n):
    states = np.empty(n, dtype=np.int64)
    states[0] = 1
    for t in range(1, n):
        if rng.random() < _REGIME_STAY:
            states[t] = states[t - 1]
        else:
            states[t] = rng.choice([s for s in range(3) if s != states[t - 1]])
    return states


def _ar1(rng, n, phi, scale):
    out = np.empty(n)
    out[0] = rng.normal(0.0, scale / np.sqrt(1 - phi * phi))
    shocks = rng.normal(0.0, scale, size=n)
    for t in range(1, n):
        out[t] = phi * out[t - 1] + shocks[t]
    return out


def generate_market(seed: int = FIXTURE_SEED) -> dict[str, PriceSeries]:
    """Nine price/level series on staggered trading calendars."""
    rng = np.random.default_rng(seed)
    calendar = trading_calendar(rng)
    n = calendar.size
    factor = _REGIME_LEVEL[_regimes(rng, n)] + _ar1(rng, n, 0.9, 0.08)
    out = {}
    for name, (kind, start, base_vol, loading, holidays) in SERIES.items():
        if kind == "level":
            noise = _ar1(rng, n, 0.8, 0.04)
            values = start * np.exp(1.1 * factor + noise)
        else:
            own = _ar1(rng, n, 0.95, 0.05)
            vol = base_vol * np.exp(loading * factor + own)
            shocks = rng.standard_t(5, size=n) * np.sqrt(3.0 / 5.0)
            values = start * np.exp(np.cumsum(vol * shocks))
        keep = np.ones(n, dtype=bool)
        keep[rng.choice(np.arange(1, n), size=holidays, replace=False)] = False
        out[name] = PriceSeries(name, calendar[keep], np.round(values[keep], 4))
    return out


def write_price_csv(series: PriceSeries, path) -> None:
    lines = ["date,close"] + [f"{d},{v:.4f}" for d, v in zip(series.dates, series.values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def catalog_yaml(window: int = DEFAULT_WINDOW) -> str:
    lines = [f"window: {window}", "standardize: true", "seed: 42", "series:"]
    for name, (kind, *_rest) in SERIES.items():
        lines += [f"  - name: {name}", f"    file: {name}.csv", f"    kind: {kind}"]
    return "\n".join(lines) + "\n"


def write_fixture(directory, seed: int = FIXTURE_SEED) -> Path:
    """Write one CSV per series plus ``catalog.yaml``; returns the catalog path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, series in generate_market(seed).items():
        write_price_csv(series, directory / f"{name}.csv")
    path = directory / "catalog.yaml"
    path.write_text(catalog_yaml(), encoding="utf-8")
    return path


def fixture_dir() -> Path:
    """Directory of the bundled fixture (shipped as package data)."""
    return Path(__file__).parent / "data" / "fixtures"


if __name__ == "__main__":
    print(write_fixture(sys.argv[1] if len(sys.argv) > 1 else fixture_dir()))
