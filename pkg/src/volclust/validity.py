"""Silhouette and Dunn indices on Euclidean distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .clustering import HardClustering
from .errors import DegenerateClusteringError


@dataclass(frozen=True)
class ValidityReport:
    k: int
    silhouette: float
    per_point_silhouette: np.ndarray
    dunn: float | None
    flags: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "silhouette": self.silhouette,
            "dunn": self.dunn,
            "flags": list(self.flags),
        }


def pairwise_distances(data) -> np.ndarray:
    x = np.asarray(getattr(data, "values", data), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return squareform(pdist(x, "euclidean"))


def _labels(clustering, n):
    if isinstance(clustering, HardClustering):
        labels, k = clustering.labels, clustering.k
    else:
        labels = np.asarray(clustering, dtype=np.int64)
        k = int(labels.max()) + 1
    if labels.size != n:
        raise ValueError(f"{labels.size} labels for {n} points")
    return labels, k


def _require_two(k):
    if k < 2:
        raise DegenerateClusteringError(f"validity indices require k >= 2, got k={k}")


def silhouette_samples(data, clustering, distances=None) -> np.ndarray:
    """s(i) = (b - a) / max(a, b); 0 for singletons and when a = b = 0."""
    d = pairwise_distances(data) if distances is None else distances
    labels, k = _labels(clustering, d.shape[0])
    _require_two(k)
    n = labels.size
    z = np.zeros((n, k))
    z[np.arange(n), labels] = 1.0
    counts = z.sum(axis=0)
    sums = d @ z
    own = counts[labels]
    rows = np.arange(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[rows, labels] / (own - 1)
        mean_to = sums / counts
    mean_to[rows, labels] = np.inf
    mean_to[:, counts == 0] = np.inf
    b = mean_to.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(n)
    ok = (own > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return s


def silhouette_index(data, clustering, distances=None) -> tuple[float, np.ndarray]:
    s = silhouette_samples(data, clustering, distances)
    return float(s.mean()), s


def dunn_index(data, clustering, distances=None) -> float:
    """Smallest between-cluster pair distance over largest within-cluster pair distance."""
    d = pairwise_distances(data) if distances is None else distances
    labels, k = _labels(clustering, d.shape[0])
    _require_two(k)
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    if not same.any():
        raise DegenerateClusteringError("Dunn index undefined: every cluster is a singleton")
    d_max = float(d[same].max())
    if d_max == 0.0:
        raise DegenerateClusteringError("Dunn index undefined: all clusters are point-coincident")
    diff = labels[:, None] != labels[None, :]
    d_min = float(d[diff].min())
    return d_min / d_max


def validity_report(data, clustering: HardClustering, distances=None) -> ValidityReport:
    d = pairwise_distances(data) if distances is None else distances
    flags = []
    if clustering.compacted:
        flags.append("clustering compacted: some requested clusters were empty")
    mean_s, per_point = silhouette_index(None, clustering, d)
    singletons = int((clustering.sizes() == 1).sum())
    if singletons:
        flags.append(f"silhouette: {singletons} singleton cluster(s) scored 0")
    try:
        dunn = dunn_index(None, clustering, d)
    except DegenerateClusteringError as exc:
        dunn = None
        flags.append(f"dunn: {exc}")
    return ValidityReport(clustering.k, mean_s, per_point, dunn, tuple(flags))
