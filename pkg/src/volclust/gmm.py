"""Gaussian mixture clustering fitted by expectation-maximization.

All densities are handled in log space; mixture sums use max-shifted
exponentials (log-sum-exp).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .clustering import HardClustering
from .errors import ConfigError, NumericalError
from .seeding import restart_rng

DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 200
DEFAULT_TOL = 1e-6
DEFAULT_REG = 1e-6
_LOG_2PI = np.log(2.0 * np.pi)
# a component holding less responsibility mass than this is considered dead
_MIN_MASS = 1e-8
_MAX_RESEEDS = 10


@dataclass(frozen=True)
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    regularization: float = DEFAULT_REG

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        cov = np.asarray(self.covariances, dtype=float)
        m, p = mu.shape
        if cov.ndim == 2 and m == 1:
            cov = cov[None]
        if w.shape != (m,) or cov.shape != (m, p, p):
            raise ValueError(f"inconsistent GMM shapes: weights {w.shape}, means {mu.shape}, covs {cov.shape}")
        for a in (w, mu, cov):
            a.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covariances", cov)

    @property
    def m(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def to_dict(self) -> dict:
        return {
            "components": self.m,
            "dimension": self.dim,
            "regularization": self.regularization,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
        }


@dataclass(frozen=True)
class GmmFitResult:
    model: GmmModel
    responsibilities: np.ndarray
    log_likelihood_trace: tuple[float, ...]
    converged: bool
    restart_index: int
    iterations: int
    reseeds: int = 0

    @property
    def log_likelihood(self) -> float:
        return self.log_likelihood_trace[-1]

    def dump(self) -> str:
        doc = self.model.to_dict()
        doc.update(
            log_likelihood_trace=list(self.log_likelihood_trace),
            converged=self.converged,
            restart_index=self.restart_index,
            iterations=self.iterations,
            reseeds=self.reseeds,
        )
        return json.dumps(doc, indent=2)


def _values(data):
    x = np.asarray(getattr(data, "values", data), dtype=float)
    return x[:, None] if x.ndim == 1 else x


def _cholesky(cov):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NumericalError("covariance matrix is not positive definite") from None


def gaussian_log_density(x, mean, cov) -> float:
    """log N(x | mean, cov) for a single point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if x.shape != mean.shape or cov.shape != (x.size, x.size):
        raise ValueError("dimension mismatch between x, mean and cov")
    return float(_component_log_density(x[None, :], mean[None, :], cov[None])[0, 0])


def _component_log_density(x, means, covs):
    """n x m matrix of log N(x_j | mu_i, Sigma_i)."""
    n, p = x.shape
    m = means.shape[0]
    chol = _cholesky(covs)
    chol_inv = np.linalg.inv(chol)
    # whitened residuals L_i^-1 (x_j - mu_i), shape (n, m, p); one GEMM for all components
    stacked = np.swapaxes(chol_inv, 1, 2).transpose(1, 0, 2).reshape(p, m * p)
    y = (x @ stacked).reshape(n, m, p) - np.einsum("mq,mpq->mp", means, chol_inv)[None]
    maha = np.einsum("nmp,nmp->nm", y, y)
    log_det = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    return -0.5 * (p * _LOG_2PI + log_det[None, :] + maha)


def _weighted_log_density(model, x):
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    return _component_log_density(x, model.means, model.covariances) + log_w[None, :]


def e_step(model: GmmModel, data) -> np.ndarray:
    """Posterior responsibilities, n x m; each row sums to 1."""
    return _e_step(model, _check_dims(model, data))[0]


def _check_dims(model, data):
    x = _values(data)
    if x.shape[1] != model.dim:
        raise ValueError(f"data has {x.shape[1]} columns, model expects {model.dim}")
    return x


def _e_step(model, x):
    lp = _weighted_log_density(model, x)
    top = lp.max(axis=1)
    if not np.all(np.isfinite(top)):
        bad = int(np.flatnonzero(~np.isfinite(top))[0])
        raise NumericalError(f"row {bad} has zero density under every component")
    shifted = np.exp(lp - top[:, None])
    total = shifted.sum(axis=1)
    resp = shifted / total[:, None]
    return resp, float((top + np.log(total)).sum())


def log_likelihood(model: GmmModel, data) -> float:
    """sum_j log sum_i w_i N(x_j | mu_i, Sigma_i)."""
    x = _check_dims(model, data)
    return float(logsumexp(_weighted_log_density(model, x), axis=1).sum())


def _moments(x, resp, reg):
    n, p = x.shape
    mass = resp.sum(axis=0)
    weights = mass / n
    means = (resp.T @ x) / mass[:, None]
    diff = x[None, :, :] - means[:, None, :]
    weighted = diff * resp.T[:, :, None]
    covs = (np.swapaxes(weighted, 1, 2) @ diff) / mass[:, None, None]
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    return mass, weights, means, covs


def m_step(data, resp, regularization: float = DEFAULT_REG) -> GmmModel:
    """Weights, means and full covariances from responsibilities (+ reg * I)."""
    x = _values(data)
    resp = np.asarray(resp, dtype=float)
    if resp.ndim != 2 or resp.shape[0] != x.shape[0]:
        raise ValueError("responsibilities must be n x m")
    with np.errstate(divide="ignore", invalid="ignore"):
        mass, weights, means, covs = _moments(x, resp, regularization)
    dead = np.flatnonzero(~(mass > 0))
    if dead.size:
        raise NumericalError(f"components {dead.tolist()} have zero responsibility mass")
    covs = covs + regularization * np.eye(x.shape[1])
    return GmmModel(weights, means, covs, regularization)


def global_covariance(x, reg=DEFAULT_REG):
    diff = x - x.mean(axis=0)
    return diff.T @ diff / x.shape[0] + reg * np.eye(x.shape[1])


def initial_model(x, m, rng, reg=DEFAULT_REG) -> GmmModel:
    """Means at m distinct rows, global covariance, uniform weights."""
    idx = rng.choice(x.shape[0], size=m, replace=False)
    cov = global_covariance(x, reg)
    return GmmModel(np.full(m, 1.0 / m), x[idx], np.repeat(cov[None], m, axis=0), reg)


def _degenerate(mass, covs, reg):
    """Components with (numerically) no mass or a variance collapsed to a point."""
    collapsed = np.trace(covs, axis1=1, axis2=2) < reg
    return np.flatnonzero((mass < _MIN_MASS) | collapsed)


def run_em(x, model: GmmModel, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL, callback=None, restart_index=0) -> GmmFitResult:
    """EM from a given starting model.

    ``callback(iteration, model, resp)`` is invoked after every E-step.
    A degenerate component is re-seeded at the lowest-density point with the
    global covariance; the likelihood trace then restarts, since the re-seed
    is not an EM step and may lower the likelihood.
    """
    x = _values(x)
    n, p = x.shape
    reg = model.regularization
    glob = global_covariance(x, reg)
    trace = []
    converged = False
    reseeds = 0
    it = 0
    while True:
        resp, ll = _e_step(model, x)
        if callback is not None:
            callback(it, model, resp)
        if trace and abs(ll - trace[-1]) < tol:
            trace.append(ll)
            converged = True
            break
        trace.append(ll)
        if it >= max_iter:
            break
        it += 1
        mass, weights, means, covs = _moments(x, resp, reg)
        bad = _degenerate(mass, covs, reg)
        covs = covs + reg * np.eye(p)
        if bad.size:
            reseeds += 1
            if reseeds > _MAX_RESEEDS:
                raise NumericalError("GMM keeps degenerating after repeated re-seeding")
            point_ll = logsumexp(_weighted_log_density(model, x), axis=1)
            order = np.argsort(point_ll, kind="stable")
            for j, comp in enumerate(bad):
                means[comp] = x[order[j]]
                covs[comp] = glob
            weights = np.maximum(weights, _MIN_MASS)
            weights = weights / weights.sum()
            trace = []
        model = GmmModel(weights, means, covs, reg)
    return GmmFitResult(model, resp, tuple(trace), converged, restart_index, it, reseeds)


def fit_gmm(data, m: int, restarts: int = DEFAULT_RESTARTS, max_iter: int = DEFAULT_MAX_ITER,
            tol: float = DEFAULT_TOL, regularization: float = DEFAULT_REG, seed: int = 42,
            callback=None) -> GmmFitResult:
    """Best final log-likelihood over seeded restarts (ties to the earlier restart)."""
    x = _values(data)
    n = x.shape[0]
    if not 1 <= m <= n:
        raise ConfigError(f"component count must lie in [1, {n}], got {m}")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    best = None
    failures = []
    for r in range(restarts):
        model = initial_model(x, m, restart_rng(seed, r), regularization)
        cb = None if callback is None else (lambda it, mod, resp, r=r: callback(r, it, mod, resp))
        try:
            res = run_em(x, model, max_iter, tol, cb, restart_index=r)
        except NumericalError as exc:
            failures.append(f"restart {r}: {exc}")
            continue
        if best is None or res.log_likelihood > best.log_likelihood:
            best = res
    if best is None:
        raise NumericalError("all GMM restarts degenerate: " + "; ".join(failures))
    return best


def hard_assign(resp) -> HardClustering:
    """Argmax responsibility per row (ties to the lowest component), compacted."""
    resp = np.asarray(resp, dtype=float)
    return HardClustering.from_labels(resp.argmax(axis=1), resp.shape[1])
