"""Kernel functions and dense Gram matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigError

KERNEL_KINDS = ("rbf", "polynomial", "sigmoid")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and parameters.

    rbf:        exp(-||x - y||^2 / (2 sigma^2))
    polynomial: (x.y + gamma) ** degree
    sigmoid:    tanh(gamma * x.y + theta)

    For rbf, ``sigma=None`` means "median pairwise distance of the data",
    resolved by :func:`resolve_kernel`.
    """

    kind: str = "rbf"
    sigma: float | None = None
    gamma: float = 0.0
    degree: int = 1
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ConfigError(f"unknown kernel {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.kind == "rbf" and self.sigma is not None and not self.sigma > 0:
            raise ConfigError("rbf kernel requires sigma > 0")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise ConfigError("polynomial kernel requires an integer degree >= 1")

    @classmethod
    def rbf(cls, sigma=None):
        return cls("rbf", sigma=sigma)

    @classmethod
    def polynomial(cls, gamma=0.0, degree=1):
        return cls("polynomial", gamma=gamma, degree=degree)

    @classmethod
    def sigmoid(cls, gamma=1.0, theta=0.0):
        return cls("sigmoid", gamma=gamma, theta=theta)

    @classmethod
    def linear(cls):
        return cls.polynomial(0.0, 1)

    def as_dict(self):
        if self.kind == "rbf":
            return {"kind": "rbf", "sigma": self.sigma}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "gamma": self.gamma, "degree": int(self.degree)}
        return {"kind": "sigmoid", "gamma": self.gamma, "theta": self.theta}


@dataclass(frozen=True)
class KernelMatrix:
    entries: np.ndarray
    spec: KernelSpec

    @property
    def n(self):
        return self.entries.shape[0]


def median_heuristic(points) -> float:
    """Median pairwise Euclidean distance; 1.0 if every pair coincides."""
    x = np.asarray(points, dtype=float)
    if x.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(x)))
    return med if med > 0 else 1.0


def resolve_kernel(spec: KernelSpec, points) -> KernelSpec:
    """Fill in a data-dependent rbf width."""
    if spec.kind == "rbf" and spec.sigma is None:
        return KernelSpec.rbf(median_heuristic(points))
    return spec


def _require_sigma(spec):
    if spec.sigma is None:
        raise ConfigError("rbf sigma unresolved; call resolve_kernel first")


def kernel_eval(x, y, spec: KernelSpec) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    if spec.kind == "rbf":
        _require_sigma(spec)
        d = x - y
        return float(np.exp(-np.dot(d, d) / (2.0 * spec.sigma**2)))
    if spec.kind == "polynomial":
        return float((np.dot(x, y) + spec.gamma) ** int(spec.degree))
    return float(np.tanh(spec.gamma * np.dot(x, y) + spec.theta))


def gram_matrix(points, spec: KernelSpec) -> KernelMatrix:
    """Dense n x n kernel matrix; the upper triangle is mirrored exactly."""
    x = np.asarray(getattr(points, "values", points), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 1:
        raise ValueError("gram matrix needs at least one point")
    spec = resolve_kernel(spec, x)
    if spec.kind == "rbf":
        d2 = squareform(pdist(x, "sqeuclidean"))
        k = np.exp(-d2 / (2.0 * spec.sigma**2))
    elif spec.kind == "polynomial":
        k = (x @ x.T + spec.gamma) ** int(spec.degree)
    else:
        k = np.tanh(spec.gamma * (x @ x.T) + spec.theta)
    upper = np.triu(k)
    k = upper + np.triu(k, 1).T
    k.flags.writeable = False
    return KernelMatrix(k, spec)
