"""Hard partitions of a point set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HardClustering:
    """Label vector over n points with k non-empty clusters.

    A label vector puts every point in exactly one cluster, so disjointness
    and coverage hold by construction; non-emptiness is checked here.
    """

    k: int
    labels: np.ndarray
    compacted: bool = False

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-D vector")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if labels.min() < 0 or labels.max() >= self.k:
            raise ValueError(f"labels must lie in [0, {self.k})")
        counts = np.bincount(labels, minlength=self.k)
        if np.any(counts == 0):
            empty = np.flatnonzero(counts == 0).tolist()
            raise ValueError(f"clusters {empty} are empty")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    @classmethod
    def from_labels(cls, labels, k=None) -> "HardClustering":
        """Build from raw labels, dropping unused label values.

        Surviving labels keep their relative order. ``compacted`` is set when
        any of the ``k`` nominal clusters was empty.
        """
        labels = np.asarray(labels, dtype=np.int64)
        if k is None:
            k = int(labels.max()) + 1
        used = np.unique(labels)
        remap = np.full(k, -1, dtype=np.int64)
        remap[used] = np.arange(used.size)
        return cls(int(used.size), remap[labels], compacted=bool(used.size < k))
