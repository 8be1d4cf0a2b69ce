"""Kernel K-Means with the kernel trick.

Cluster means in feature space are never formed; the squared distance from
phi(x_n) to the mean of cluster C expands to

    K_nn - (2/|C|) sum_{j in C} K_nj + (1/|C|^2) sum_{j,l in C} K_jl

which needs only Gram-matrix entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import HardClustering
from .errors import ConfigError
from .kernels import KernelMatrix, KernelSpec, gram_matrix
from .seeding import restart_rng

DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300
_INIT_ATTEMPTS = 100


@dataclass(frozen=True)
class KernelKMeansResult:
    clustering: HardClustering
    objective: float
    iterations: int
    converged: bool
    restart_index: int
    objective_trace: tuple[float, ...]
    kernel: KernelSpec | None = None


def _gram(g):
    return g.entries if isinstance(g, KernelMatrix) else np.asarray(g, dtype=float)


def feature_space_distance_sq(gram, point: int, members) -> float:
    """||phi(x_point) - mean of phi over members||^2, clamped at 0."""
    K = _gram(gram)
    members = np.asarray(members, dtype=np.int64).ravel()
    if members.size == 0:
        raise ValueError("member set is empty")
    c = members.size
    d = K[point, point] - 2.0 * K[point, members].sum() / c + K[np.ix_(members, members)].sum() / c**2
    return max(float(d), 0.0)


def distance_table(gram, labels, k: int) -> np.ndarray:
    """n x k squared feature-space distances to every cluster mean.

    Empty clusters get +inf.
    """
    K = _gram(gram)
    labels = np.asarray(labels)
    n = K.shape[0]
    z = np.zeros((n, k))
    z[np.arange(n), labels] = 1.0
    counts = z.sum(axis=0)
    kz = K @ z
    within = (z * kz).sum(axis=0)
    alive = counts > 0
    d = np.full((n, k), np.inf)
    c = counts[alive]
    d[:, alive] = np.diag(K)[:, None] - 2.0 * kz[:, alive] / c + within[alive] / c**2
    np.maximum(d, 0.0, out=d)
    return d


def kernel_kmeans_objective(gram, labels, k: int) -> float:
    """Total within-cluster scatter in feature space."""
    labels = np.asarray(labels)
    d = distance_table(gram, labels, k)
    return float(d[np.arange(labels.size), labels].sum())


def repair_empty_clusters(labels, dist, k: int) -> np.ndarray:
    """Refill empty clusters, lowest index first.

    Each empty cluster receives the point farthest from the mean it was
    assigned to (``dist[i, labels[i]]``), taken only from clusters that keep
    at least one member. Ties go to the lowest point index.
    """
    labels = np.array(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=k)
    if np.all(counts > 0):
        return labels
    cost = dist[np.arange(labels.size), labels].copy()
    for c in np.flatnonzero(counts == 0):
        donors = counts[labels] >= 2
        if not donors.any():
            raise ConfigError("cannot fill empty cluster: fewer points than clusters")
        i = int(np.argmax(np.where(donors, cost, -np.inf)))
        counts[labels[i]] -= 1
        labels[i] = c
        counts[c] = 1
        cost[i] = 0.0
    return labels


def random_assignment(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Uniform labels per point, redrawn until every cluster is used.

    After ``_INIT_ATTEMPTS`` failed draws (only likely when k is close to n)
    a random k-subset of points is pinned to distinct clusters instead.
    """
    for _ in range(_INIT_ATTEMPTS):
        labels = rng.integers(0, k, size=n)
        if np.unique(labels).size == k:
            return labels
    labels = rng.integers(0, k, size=n)
    labels[rng.permutation(n)[:k]] = np.arange(k)
    return labels


def run_kernel_kmeans(gram, init_labels, k: int, max_iter: int = DEFAULT_MAX_ITER, restart_index: int = 0) -> KernelKMeansResult:
    """One batch (Lloyd-style) run from a given initial assignment."""
    if max_iter < 1:
        raise ConfigError("max_iter must be >= 1")
    K = _gram(gram)
    labels = np.asarray(init_labels, dtype=np.int64)
    n = K.shape[0]
    if labels.shape != (n,):
        raise ValueError("init_labels length must equal the number of points")
    if np.bincount(labels, minlength=k).min() == 0 or labels.max() >= k:
        raise ValueError("initial assignment must use every cluster")
    rows = np.arange(n)
    trace = []
    converged = False
    iterations = max_iter
    for it in range(1, max_iter + 1):
        dist = distance_table(K, labels, k)
        trace.append(float(dist[rows, labels].sum()))
        new = repair_empty_clusters(dist.argmin(axis=1), dist, k)
        if np.array_equal(new, labels):
            converged = True
            iterations = it
            break
        labels = new
    if not converged:
        trace.append(kernel_kmeans_objective(K, labels, k))
    return KernelKMeansResult(
        clustering=HardClustering(k, labels),
        objective=trace[-1],
        iterations=iterations,
        converged=converged,
        restart_index=restart_index,
        objective_trace=tuple(trace),
        kernel=gram.spec if isinstance(gram, KernelMatrix) else None,
    )


def fit_kernel_kmeans(points, k: int, spec: KernelSpec | None = None, restarts: int = DEFAULT_RESTARTS,
                      max_iter: int = DEFAULT_MAX_ITER, seed: int = 42) -> KernelKMeansResult:
    """Best-of-``restarts`` Kernel K-Means; lowest objective wins, ties to the earlier restart."""
    x = np.asarray(getattr(points, "values", points), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in [1, {n}], got {k}")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    gram = gram_matrix(x, spec or KernelSpec.rbf())
    best = None
    for r in range(restarts):
        init = random_assignment(restart_rng(seed, r), n, k)
        res = run_kernel_kmeans(gram, init, k, max_iter, restart_index=r)
        if best is None or res.objective < best.objective:
            best = res
    return best
