"""Cluster-count x feature-count quality grids.

Each cell clusters the first ``f`` features of the configured order into
``k`` clusters and scores the result with the requested validity indices.
Cells are independent work items keyed by their own derived seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .clustering import HardClustering
from .data_pipeline import DEFAULT_FEATURE_ORDER, FeatureMatrix
from .errors import ConfigError, DataError, NumericalError
from .gmm import DEFAULT_MAX_ITER as GMM_MAX_ITER, DEFAULT_REG, DEFAULT_TOL, fit_gmm, hard_assign
from .kernel_kmeans import DEFAULT_MAX_ITER as KKM_MAX_ITER, fit_kernel_kmeans
from .kernels import KernelSpec, resolve_kernel
from .seeding import cell_seed
from .som import SomSchedule, assign_som, fit_som
from .validity import dunn_index, pairwise_distances, silhouette_index

ALGORITHMS = ("kernel_kmeans", "som", "gmm")
INDICES = ("dunn", "silhouette")


@dataclass(frozen=True)
class SweepConfig:
    algorithms: tuple[str, ...] = ALGORITHMS
    indices: tuple[str, ...] = INDICES
    clusters: tuple[int, int] = (2, 11)
    features: tuple[int, int] = (2, 9)
    feature_order: tuple[str, ...] | None = None
    restarts: int = 10
    seed: int = 42
    kernel: KernelSpec = field(default_factory=KernelSpec)
    kkm_max_iter: int = KKM_MAX_ITER
    gmm_max_iter: int = GMM_MAX_ITER
    gmm_tol: float = DEFAULT_TOL
    gmm_reg: float = DEFAULT_REG
    som_schedule: SomSchedule = field(default_factory=SomSchedule)

    def __post_init__(self):
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
        for i in self.indices:
            if i not in INDICES:
                raise ConfigError(f"unknown index {i!r}; expected one of {INDICES}")
        if not self.algorithms or not self.indices:
            raise ConfigError("need at least one algorithm and one index")
        for name, (lo, hi) in (("cluster", self.clusters), ("feature", self.features)):
            if lo > hi:
                raise ConfigError(f"{name} range {lo}..{hi} is empty")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")

    @property
    def cluster_counts(self) -> tuple[int, ...]:
        return tuple(range(self.clusters[0], self.clusters[1] + 1))

    @property
    def feature_counts(self) -> tuple[int, ...]:
        return tuple(range(self.features[0], self.features[1] + 1))

    def order_for(self, data: FeatureMatrix) -> tuple[str, ...]:
        """Configured order, else the default order if the data carries it, else column order."""
        if self.feature_order is not None:
            return tuple(self.feature_order)
        if set(DEFAULT_FEATURE_ORDER) <= set(data.names):
            return DEFAULT_FEATURE_ORDER
        return data.names

    def validate(self, data: FeatureMatrix) -> None:
        order = self.order_for(data)
        missing = [n for n in order if n not in data.names]
        if missing:
            raise ConfigError(f"feature order names columns missing from the data: {missing}")
        if len(set(order)) != len(order):
            raise ConfigError("feature order contains duplicates")
        lo, hi = self.clusters
        if lo < 2 or hi > data.n - 1:
            raise ConfigError(f"cluster range {lo}..{hi} must lie within [2, {data.n - 1}]")
        lo, hi = self.features
        if lo < 1 or hi > len(order):
            raise ConfigError(f"feature range {lo}..{hi} must lie within [1, {len(order)}]")


@dataclass(frozen=True)
class CellResult:
    algorithm: str
    k: int
    f: int
    scores: dict
    failures: dict
    meta: dict


@dataclass
class ScoreTable:
    """Scores for one (algorithm, index): rows = cluster counts, cols = feature counts.

    Failed cells hold NaN and have a reason in ``failures[(k, f)]``.
    """

    algorithm: str
    index: str
    cluster_counts: tuple[int, ...]
    feature_counts: tuple[int, ...]
    scores: np.ndarray
    failures: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if self.scores.shape != (len(self.cluster_counts), len(self.feature_counts)):
            raise ValueError("score matrix shape does not match the axes")

    def score(self, k: int, f: int) -> float:
        return float(self.scores[self.cluster_counts.index(k), self.feature_counts.index(f)])


@dataclass
class SweepGrid:
    tables: dict
    cells: dict = field(default_factory=dict)

    def table(self, algorithm: str, index: str) -> ScoreTable:
        try:
            return self.tables[(algorithm, index)]
        except KeyError:
            raise ConfigError(f"sweep has no table for ({algorithm}, {index})") from None

    @classmethod
    def from_tables(cls, *tables: ScoreTable) -> "SweepGrid":
        return cls({(t.algorithm, t.index): t for t in tables})


def cell_data(data: FeatureMatrix, config: SweepConfig, f: int) -> FeatureMatrix:
    return data.select(config.order_for(data)[:f])


def fit_cell(data: FeatureMatrix, config: SweepConfig, algorithm: str, k: int, f: int):
    """Fit one cell; returns (hard clustering, metadata, raw fit result)."""
    x = cell_data(data, config, f).values
    seed = cell_seed(config.seed, algorithm, k, f)
    if algorithm == "kernel_kmeans":
        spec = resolve_kernel(config.kernel, x)
        res = fit_kernel_kmeans(x, k, spec, config.restarts, config.kkm_max_iter, seed)
        meta = {"restart": res.restart_index, "converged": res.converged,
                "objective": res.objective, "sigma": spec.sigma}
        clustering = res.clustering
    elif algorithm == "gmm":
        res = fit_gmm(x, k, config.restarts, config.gmm_max_iter, config.gmm_tol, config.gmm_reg, seed)
        meta = {"restart": res.restart_index, "converged": res.converged,
                "objective": res.log_likelihood, "reseeds": res.reseeds}
        clustering = hard_assign(res.responsibilities)
    elif algorithm == "som":
        res = fit_som(x, k, config.som_schedule, config.restarts, seed)
        meta = {"restart": res.restart_index, "converged": True, "objective": res.quantization_error}
        clustering = assign_som(res.grid, x)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    meta.update(seed=seed, clusters_found=clustering.k, compacted=clustering.compacted)
    return clustering, meta, res


def run_cell(data: FeatureMatrix, config: SweepConfig, algorithm: str, k: int, f: int) -> CellResult:
    """Cluster the first ``f`` features into ``k`` clusters and score it."""
    try:
        clustering, meta, _ = fit_cell(data, config, algorithm, k, f)
    except NumericalError as exc:
        reason = f"{algorithm} failed: {exc}"
        return CellResult(algorithm, k, f, {i: None for i in config.indices},
                          {i: reason for i in config.indices},
                          {"seed": cell_seed(config.seed, algorithm, k, f)})
    dist = pairwise_distances(cell_data(data, config, f).values)
    scores, failures = {}, {}
    for index in config.indices:
        try:
            scores[index] = _score(index, clustering, dist)
        except NumericalError as exc:
            scores[index] = None
            failures[index] = str(exc)
    return CellResult(algorithm, k, f, scores, failures, meta)


def _score(index, clustering: HardClustering, dist):
    if index == "dunn":
        return dunn_index(None, clustering, dist)
    return silhouette_index(None, clustering, dist)[0]


def _run_cell_job(args):
    return run_cell(*args)


def default_jobs(cells: int) -> int:
    return max(1, min(os.cpu_count() or 1, cells))


def run_sweep(data: FeatureMatrix, config: SweepConfig | None = None, jobs: int | None = None) -> SweepGrid:
    config = config or SweepConfig()
    config.validate(data)
    work = [(a, k, f) for a in config.algorithms for k in config.cluster_counts for f in config.feature_counts]
    jobs = default_jobs(len(work)) if jobs is None else max(1, min(jobs, len(work)))
    args = [(data, config, a, k, f) for a, k, f in work]
    if jobs == 1:
        results = [_run_cell_job(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell_job, args, chunksize=max(1, len(args) // (4 * jobs))))
    return assemble(config, results)


def assemble(config: SweepConfig, results) -> SweepGrid:
    ks, fs = config.cluster_counts, config.feature_counts
    tables = {}
    for a in config.algorithms:
        for i in config.indices:
            tables[(a, i)] = ScoreTable(a, i, ks, fs, np.full((len(ks), len(fs)), np.nan))
    cells = {}
    for cell in results:
        cells[(cell.algorithm, cell.k, cell.f)] = cell
        for i in config.indices:
            t = tables[(cell.algorithm, i)]
            r, c = ks.index(cell.k), fs.index(cell.f)
            if cell.scores[i] is None:
                t.failures[(cell.k, cell.f)] = cell.failures[i]
            else:
                t.scores[r, c] = cell.scores[i]
    return SweepGrid(tables, cells)


def best_cell(grid, algorithm: str, index: str) -> tuple[int, int, float]:
    """(feature count, cluster count, score) of the maximum non-failed cell.

    Ties go to fewer features, then fewer clusters.
    """
    t = grid if isinstance(grid, ScoreTable) else grid.table(algorithm, index)
    best = None
    for c, f in enumerate(t.feature_counts):
        for r, k in enumerate(t.cluster_counts):
            v = t.scores[r, c]
            if np.isnan(v):
                continue
            if best is None or v > best[2]:
                best = (f, k, float(v))
    if best is None:
        raise NumericalError(f"every cell of ({algorithm}, {index}) failed")
    return best


def emit_table(grid, algorithm: str, index: str) -> str:
    """CSV: header of feature counts, one row per cluster count, 4 decimals, NA for failures."""
    t = grid if isinstance(grid, ScoreTable) else grid.table(algorithm, index)
    out = ["clusters\\features," + ",".join(str(f) for f in t.feature_counts)]
    for r, k in enumerate(t.cluster_counts):
        cells = ["NA" if np.isnan(v) else f"{v:.4f}" for v in t.scores[r]]
        out.append(f"{k}," + ",".join(cells))
    return "\n".join(out) + "\n"


def parse_table(text: str, algorithm: str, index: str, source=None) -> ScoreTable:
    """Inverse of :func:`emit_table` (failure reasons are not recoverable)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if len(rows) < 2:
        raise DataError("table needs a header and at least one row", source=source)
    try:
        fs = tuple(int(v) for v in rows[0][1:])
        ks, scores = [], []
        for line, row in enumerate(rows[1:], start=2):
            if len(row) != len(fs) + 1:
                raise DataError(f"expected {len(fs) + 1} fields, got {len(row)}", source=source, line=line)
            ks.append(int(row[0]))
            scores.append([math.nan if v.strip() == "NA" else float(v) for v in row[1:]])
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"malformed table ({exc})", source=source) from None
    if not fs:
        raise DataError("table has no feature columns", source=source)
    failures = {(k, f): "NA" for r, k in enumerate(ks) for c, f in enumerate(fs) if math.isnan(scores[r][c])}
    return ScoreTable(algorithm, index, tuple(ks), fs, np.array(scores), failures)


def table_filename(algorithm: str, index: str) -> str:
    return f"{algorithm}_{index}.csv"


def summary(grid: SweepGrid, config: SweepConfig, data: FeatureMatrix | None = None) -> dict:
    doc = {
        "seed": config.seed,
        "restarts": config.restarts,
        "cluster_counts": list(config.cluster_counts),
        "feature_counts": list(config.feature_counts),
        "feature_order": list(config.order_for(data)) if data is not None else config.feature_order,
        "kernel": config.kernel.as_dict(),
        "tables": {},
    }
    for (a, i), t in grid.tables.items():
        try:
            f, k, s = best_cell(t, a, i)
            best = {"features": f, "clusters": k, "score": round(s, 4)}
        except NumericalError:
            best = None
        doc["tables"][f"{a}_{i}"] = {
            "file": table_filename(a, i),
            "best": best,
            "failed_cells": [
                {"clusters": k, "features": f, "reason": reason}
                for (k, f), reason in sorted(t.failures.items())
            ],
        }
    flags = []
    for (a, k, f), cell in sorted(grid.cells.items()):
        if cell.meta.get("compacted"):
            flags.append(f"{a} k={k} f={f}: only {cell.meta['clusters_found']} non-empty clusters")
        if cell.meta.get("converged") is False:
            flags.append(f"{a} k={k} f={f}: best restart hit max_iter")
        if cell.meta.get("reseeds"):
            flags.append(f"{a} k={k} f={f}: {cell.meta['reseeds']} component re-seed(s)")
    doc["flags"] = flags
    return doc


def summary_json(grid: SweepGrid, config: SweepConfig, data: FeatureMatrix | None = None) -> str:
    return json.dumps(summary(grid, config, data), indent=2) + "\n"


def with_overrides(config: SweepConfig, **kw) -> SweepConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
