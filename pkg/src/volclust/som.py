"""Kohonen self-organizing map, trained online; each unit is one cluster."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .clustering import HardClustering
from .errors import ConfigError, DataError
from .seeding import restart_rng

DEFAULT_RESTARTS = 10


@dataclass(frozen=True)
class SomSchedule:
    """Exponentially decayed learning rate and neighborhood width.

    ``sigma0=None`` means max(rows, cols) / 2 for the grid being trained.
    """

    epochs: int = 50
    lr0: float = 0.5
    lr_final: float = 0.01
    sigma0: float | None = None
    sigma_final: float = 0.1

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.lr0 >= self.lr_final > 0:
            raise ConfigError("need lr0 >= lr_final > 0")
        if self.sigma0 is not None and not self.sigma0 >= self.sigma_final:
            raise ConfigError("need sigma0 >= sigma_final")
        if not self.sigma_final > 0:
            raise ConfigError("sigma_final must be > 0")

    def resolved_sigma0(self, shape) -> float:
        s0 = self.sigma0 if self.sigma0 is not None else max(shape) / 2.0
        return max(s0, self.sigma_final)

    def rates(self, total_steps: int, shape) -> tuple[np.ndarray, np.ndarray]:
        """Per-step learning rates and widths, geometric from start to final value."""
        frac = np.arange(total_steps) / max(total_steps - 1, 1)
        s0 = self.resolved_sigma0(shape)
        lr = self.lr0 * (self.lr_final / self.lr0) ** frac
        sigma = s0 * (self.sigma_final / s0) ** frac
        return lr, sigma


@dataclass(frozen=True)
class SomGrid:
    shape: tuple[int, int]
    coords: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        rows, cols = self.shape
        if rows < 1 or cols < 1:
            raise ConfigError("SOM lattice needs rows, cols >= 1")
        w = np.array(self.weights, dtype=float)
        c = np.array(self.coords, dtype=np.int64)
        if w.ndim != 2 or w.shape[0] != rows * cols or c.shape != (rows * cols, 2):
            raise ValueError("weights/coords inconsistent with lattice shape")
        if not np.all(np.isfinite(w)):
            raise ValueError("SOM weights must be finite")
        w.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "shape", (int(rows), int(cols)))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "coords", c)

    @property
    def units(self) -> int:
        return self.weights.shape[0]

    def to_csv(self) -> str:
        dim = self.weights.shape[1]
        lines = ["unit,row,col," + ",".join(f"w{j}" for j in range(dim))]
        for u, ((r, c), w) in enumerate(zip(self.coords, self.weights)):
            lines.append(f"{u},{r},{c}," + ",".join(f"{v:.10g}" for v in w))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SomFitResult:
    grid: SomGrid
    quantization_error: float
    restart_index: int


def lattice_coords(rows: int, cols: int) -> np.ndarray:
    """Row-major integer lattice positions."""
    r, c = np.divmod(np.arange(rows * cols), cols)
    return np.column_stack([r, c])


def neighborhood(d, sigma: float):
    """Gaussian neighborhood exp(-d^2 / (2 sigma^2))."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    return np.exp(-np.square(d) / (2.0 * sigma * sigma))


@numba.njit(cache=True)
def _bmu(weights, x):
    best = 0
    best_d = np.inf
    for j in range(weights.shape[0]):
        d = 0.0
        for q in range(weights.shape[1]):
            t = x[q] - weights[j, q]
            d += t * t
        if d < best_d:
            best_d = d
            best = j
    return best


@numba.njit(cache=True)
def _update(weights, x, bmu, lattice_d2, lr, sigma):
    denom = 2.0 * sigma * sigma
    for j in range(weights.shape[0]):
        h = np.exp(-lattice_d2[bmu, j] / denom)
        step = lr * h
        for q in range(weights.shape[1]):
            weights[j, q] += step * (x[q] - weights[j, q])


@numba.njit(cache=True)
def _train(weights, data, order, lattice_d2, lr, sigma):
    for t in range(order.size):
        x = data[order[t]]
        _update(weights, x, _bmu(weights, x), lattice_d2, lr[t], sigma[t])


def _lattice_d2(coords):
    diff = coords[:, None, :] - coords[None, :, :]
    return (diff * diff).sum(axis=2).astype(float)


def best_matching_unit(grid: SomGrid, x) -> int:
    """Nearest unit by Euclidean distance; ties to the lowest index."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != grid.weights.shape[1]:
        raise ValueError(f"dimension mismatch: {x.size} vs {grid.weights.shape[1]}")
    return int(_bmu(grid.weights, x))


def update_step(grid: SomGrid, x, lr: float, sigma: float) -> SomGrid:
    """One online update: w_j += lr * h_j * (x - w_j) around the BMU of x."""
    x = np.asarray(x, dtype=float).ravel()
    w = np.array(grid.weights)
    _update(w, x, best_matching_unit(grid, x), _lattice_d2(grid.coords), float(lr), float(sigma))
    return SomGrid(grid.shape, grid.coords, w)


def _data(data):
    x = np.asarray(getattr(data, "values", data), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise DataError("cannot train a SOM on empty data")
    return np.ascontiguousarray(x)


def init_grid(x, shape, rng) -> SomGrid:
    """Unit weights at distinct random rows (with replacement only if units > n)."""
    rows, cols = shape
    units = rows * cols
    idx = rng.choice(x.shape[0], size=units, replace=units > x.shape[0])
    return SomGrid((rows, cols), lattice_coords(rows, cols), x[idx])


def train_som(data, shape=(1, 2), schedule: SomSchedule | None = None, seed: int = 42, rng=None) -> SomGrid:
    """Online training: each epoch presents every row once in a fresh random order."""
    x = _data(data)
    schedule = schedule or SomSchedule()
    rng = rng if rng is not None else np.random.default_rng(seed)
    grid = init_grid(x, shape, rng)
    n = x.shape[0]
    order = np.concatenate([rng.permutation(n) for _ in range(schedule.epochs)])
    lr, sigma = schedule.rates(order.size, grid.shape)
    w = np.array(grid.weights)
    _train(w, x, order, _lattice_d2(grid.coords), lr, sigma)
    return SomGrid(grid.shape, grid.coords, w)


def bmu_indices(grid: SomGrid, data) -> np.ndarray:
    x = _data(data)
    d2 = ((x[:, None, :] - grid.weights[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def quantization_error(grid: SomGrid, data) -> float:
    """Mean squared distance from each row to its BMU weight."""
    x = _data(data)
    d2 = ((x[:, None, :] - grid.weights[None, :, :]) ** 2).sum(axis=2)
    return float(d2.min(axis=1).mean())


def assign_som(grid: SomGrid, data) -> HardClustering:
    """Label = BMU index, with unused units dropped (``compacted`` flag)."""
    return HardClustering.from_labels(bmu_indices(grid, data), grid.units)


def fit_som(data, k: int, schedule: SomSchedule | None = None, restarts: int = DEFAULT_RESTARTS,
            seed: int = 42, shape=None) -> SomFitResult:
    """Best-of-``restarts`` SOM on a 1 x k lattice, by quantization error."""
    x = _data(data)
    shape = tuple(shape) if shape is not None else (1, int(k))
    if shape[0] * shape[1] != k:
        raise ConfigError(f"lattice {shape} does not have {k} units")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    best = None
    for r in range(restarts):
        grid = train_som(x, shape, schedule, rng=restart_rng(seed, r))
        qe = quantization_error(grid, x)
        if best is None or qe < best.quantization_error:
            best = SomFitResult(grid, qe, r)
    return best
