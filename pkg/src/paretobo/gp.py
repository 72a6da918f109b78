"""Noise-free Gaussian-process regression with a Matérn-5/2 ARD kernel.

Inputs are mapped to the unit cube through the domain's affine transform and
observations are min-max scaled to [0, 1] before fitting. Two layers of
query functions are provided:

* ``posterior``, ``posterior_mean_unscaled``, ``posterior_cov`` and
  ``posterior_gradients`` take points in the original domain (the
  gradients are still taken with respect to the unit-cube coordinates);
* ``predict``, ``predict_cov`` and ``predict_gradients`` take batches of
  unit-cube points directly and are what the optimizers call.

The kernel is

    k(x, y) = a0 * (1 + s + s**2 / 3) * exp(-s),   s = sqrt(5) * r,
    r**2 = sum_i w_i * (x_i - y_i)**2

with ``a0`` the output scale and ``w`` the inverse squared lengthscales.

The stabilizing jitter on the kernel diagonal is treated as part of the
prior: a query point that coincides with a training point (within 1e-12 in
every coordinate) also gets the jitter in its cross-covariance, and every
query gets it in its self-covariance. The posterior therefore interpolates
the data exactly, with zero variance at the training points.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

from .benchfns import BoxDomain

__all__ = [
    "KernelParams",
    "TrainedGP",
    "Posterior",
    "GPFitError",
    "matern_kernel",
    "matern_kernel_gradient",
    "kernel_matrix",
    "log_marginal_likelihood",
    "fit",
    "build_trained_gp",
    "posterior",
    "posterior_mean_unscaled",
    "posterior_cov",
    "posterior_gradients",
    "predict",
    "predict_cov",
    "joint_moments",
    "predict_gradients",
]

log = logging.getLogger(__name__)

SQRT5 = np.sqrt(5.0)
COINCIDE_TOL = 1e-12
JITTER_START = 1e-8
JITTER_MAX = 1e-2
LOG_BOUND = 6.0
MEAN_BOUNDS = (-1.0, 2.0)
N_STARTS = 8
MLE_MAXITER = 200


class GPFitError(RuntimeError):
    """Kernel matrix could not be factorized, or the design is degenerate."""


@dataclass(frozen=True)
class KernelParams:
    output_scale: float
    inv_lengthscales: np.ndarray
    constant_mean: float = 0.0
    smoothness: float = 2.5

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.inv_lengthscales, dtype=np.float64)).copy()
        if not self.output_scale > 0:
            raise ValueError("output_scale must be positive")
        if np.any(w < 1e-6) or np.any(w > 1e6):
            raise ValueError("inv_lengthscales must lie in [1e-6, 1e6]")
        if self.smoothness != 2.5:
            raise ValueError("only the Matérn-5/2 kernel is implemented")
        w.setflags(write=False)
        object.__setattr__(self, "inv_lengthscales", w)
        object.__setattr__(self, "output_scale", float(self.output_scale))
        object.__setattr__(self, "constant_mean", float(self.constant_mean))

    @property
    def dim(self) -> int:
        return self.inv_lengthscales.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[np.log(self.output_scale)],
                               np.log(self.inv_lengthscales), [self.constant_mean]])

    @classmethod
    def from_vector(cls, theta) -> "KernelParams":
        theta = np.asarray(theta, dtype=np.float64)
        return cls(float(np.exp(theta[0])), np.exp(theta[1:-1]), float(theta[-1]))


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float


@dataclass(frozen=True, eq=False)
class TrainedGP:
    """A GP conditioned on observations; immutable after construction."""

    X_scaled: np.ndarray
    y_scaled: np.ndarray
    params: KernelParams
    chol: np.ndarray
    alpha_vec: np.ndarray
    domain: BoxDomain
    y_min: float
    y_max: float
    jitter: float

    @property
    def n_obs(self) -> int:
        return self.X_scaled.shape[0]

    @property
    def dim(self) -> int:
        return self.X_scaled.shape[1]

    @property
    def f_best(self) -> float:
        """Best (smallest) scaled observation."""
        return float(self.y_scaled.min())


# ---------------------------------------------------------------------------
# kernel


def _sqdist(A, B, w):
    """Weighted squared distances ``sum_i w_i (a_i - b_i)^2``, shape (len A, len B)."""
    diff = A[:, None, :] - B[None, :, :]
    return (diff * diff) @ w


def _matern_from_r2(r2, a0):
    s = SQRT5 * np.sqrt(r2)
    return a0 * (1.0 + s + s * s / 3.0) * np.exp(-s)


def _dk_dr2(r2, a0):
    """dk/d(r^2) = -a0 * (5/6) * (1 + s) * exp(-s)."""
    s = SQRT5 * np.sqrt(r2)
    return -a0 * (5.0 / 6.0) * (1.0 + s) * np.exp(-s)


def kernel_matrix(A, B, p: KernelParams):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    r2 = _sqdist(A, B, p.inv_lengthscales)
    return _matern_from_r2(r2, p.output_scale)


def matern_kernel(x, y, p: KernelParams) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size != p.dim:
        raise ValueError("x and y must both have length n")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FloatingPointError("non-finite kernel input")
    d = x - y
    r2 = float(np.dot(p.inv_lengthscales, d * d))
    return float(_matern_from_r2(r2, p.output_scale))


def matern_kernel_gradient(x, y, p: KernelParams) -> np.ndarray:
    """Gradient of ``k(x, y)`` with respect to ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size != p.dim:
        raise ValueError("x and y must both have length n")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FloatingPointError("non-finite kernel input")
    d = x - y
    r2 = float(np.dot(p.inv_lengthscales, d * d))
    return 2.0 * float(_dk_dr2(r2, p.output_scale)) * p.inv_lengthscales * d


# ---------------------------------------------------------------------------
# likelihood


def _cholesky_with_jitter(K, a0):
    """Cholesky of ``K + jitter*I`` with jitter escalating from 1e-8*a0 by x10."""
    k = K.shape[0]
    rel = JITTER_START
    while rel <= JITTER_MAX * (1 + 1e-9):
        jitter = rel * a0
        try:
            L = np.linalg.cholesky(K + jitter * np.eye(k))
            if np.all(np.isfinite(L)):
                return L, jitter
        except np.linalg.LinAlgError:
            pass
        rel *= 10.0
    raise GPFitError(f"kernel matrix not positive definite with jitter up to {JITTER_MAX:g}*a0")


def log_marginal_likelihood(p: KernelParams, X_scaled, y_scaled) -> float:
    """Log evidence of ``y_scaled`` under the GP prior with parameters ``p``.

    The jitter added to the kernel diagonal is the smallest rung of the
    escalation ladder for which the Cholesky factorization succeeds.
    """
    Z = np.atleast_2d(np.asarray(X_scaled, dtype=np.float64))
    y = np.asarray(y_scaled, dtype=np.float64)
    K = kernel_matrix(Z, Z, p)
    L, _ = _cholesky_with_jitter(K, p.output_scale)
    r = y - p.constant_mean
    v = solve_triangular(L, r, lower=True)
    k = y.size
    return float(-0.5 * v @ v - np.log(np.diag(L)).sum() - 0.5 * k * np.log(2.0 * np.pi))


class _LikelihoodObjective:
    """Negative log evidence and its gradient in ``(log a0, log w, mu)``."""

    def __init__(self, Z, y):
        self.Z = Z
        self.y = y
        self.k, self.n = Z.shape
        diff = Z[:, None, :] - Z[None, :, :]
        self.D = diff * diff  # (k, k, n)
        self.const = 0.5 * self.k * np.log(2.0 * np.pi)

    def __call__(self, theta):
        a0 = np.exp(theta[0])
        w = np.exp(theta[1:-1])
        mu = theta[-1]
        r2 = self.D @ w
        K = _matern_from_r2(r2, a0)
        try:
            L, jitter = _cholesky_with_jitter(K, a0)
        except GPFitError:
            return 1e10, np.zeros_like(theta)
        r = self.y - mu
        alpha = cho_solve((L, True), r)
        nll = 0.5 * r @ alpha + np.log(np.diag(L)).sum() + self.const
        Kinv = cho_solve((L, True), np.eye(self.k))
        W = np.outer(alpha, alpha) - Kinv
        grad = np.empty_like(theta)
        # jitter is proportional to a0, so dK/dlog(a0) = K + jitter*I
        grad[0] = 0.5 * (r @ alpha - self.k)
        G = _dk_dr2(r2, a0)
        grad[1:-1] = 0.5 * w * np.einsum("ab,abi->i", W * G, self.D)
        grad[-1] = alpha.sum()
        return float(nll), -grad


def _canonical_order(Z, y):
    order = np.lexsort(np.column_stack([Z, y])[:, ::-1].T)
    return Z[order], y[order]


def _check_duplicates(Z, X):
    k = Z.shape[0]
    if k < 2:
        return
    # rows are lexicographically sorted, so exact duplicates are adjacent;
    # near-duplicates are caught with a full pairwise check
    d = np.abs(Z[:, None, :] - Z[None, :, :]).max(axis=2)
    iu = np.triu_indices(k, 1)
    bad = d[iu] <= 1e-12
    if np.any(bad):
        pairs = [(int(a), int(b)) for a, b in zip(iu[0][bad], iu[1][bad])]
        a, b = pairs[0]
        raise GPFitError(
            f"duplicate observation points make the kernel matrix singular: "
            f"{X[a].tolist()} and {X[b].tolist()} ({len(pairs)} duplicate pair(s))")


def _scale_y(y):
    y_min, y_max = float(y.min()), float(y.max())
    if y_max > y_min:
        return (y - y_min) / (y_max - y_min), y_min, y_max
    return np.full_like(y, 0.5), y_min, y_max


def build_trained_gp(X_scaled, y_scaled, params: KernelParams, domain: BoxDomain,
                     y_min: float = 0.0, y_max: float = 1.0) -> TrainedGP:
    """Condition a GP on unit-cube data with fixed hyperparameters."""
    Z = np.array(np.atleast_2d(X_scaled), dtype=np.float64)
    y = np.array(y_scaled, dtype=np.float64).ravel()
    K = kernel_matrix(Z, Z, params)
    L, jitter = _cholesky_with_jitter(K, params.output_scale)
    alpha = cho_solve((L, True), y - params.constant_mean)
    for arr in (Z, y, L, alpha):
        arr.setflags(write=False)
    return TrainedGP(Z, y, params, L, alpha, domain, float(y_min), float(y_max), jitter)


def _heuristic_start(Z, y):
    n = Z.shape[1]
    a0 = max(float(np.var(y)), 0.05) if y.size > 1 else 0.25
    # typical squared coordinate gap in the unit cube is 1/6, so w = 6/n puts
    # random pairs at r ~ 1
    w = np.full(n, 6.0 / n)
    return np.concatenate([[np.log(a0)], np.log(w), [float(np.mean(y))]])


def fit(X, y, domain: BoxDomain, seed=0, n_starts: int = N_STARTS,
        maxiter: int = MLE_MAXITER) -> TrainedGP:
    """Fit hyperparameters by maximum likelihood and condition on the data.

    Parameters
    ----------
    X : (k, n) array
        Observation points in the domain.
    y : (k,) array
        Observed values.
    domain : BoxDomain
    seed : int
        Seeds the random restarts of the likelihood optimizer.

    Returns
    -------
    TrainedGP

    Raises
    ------
    GPFitError
        On duplicate points, or if no start yields a factorizable kernel.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.size or X.shape[0] < 1:
        raise ValueError("need k >= 1 points with one value each")
    if X.shape[1] != domain.dim:
        raise ValueError("points do not match the domain dimension")
    if not np.all(np.isfinite(y)):
        raise ValueError("observations must be finite")
    Z = np.clip(domain.to_unit(X), 0.0, 1.0)
    ys, y_min, y_max = _scale_y(y)
    Z, ys = _canonical_order(Z, ys)
    _check_duplicates(Z, domain.from_unit(Z))
    n = Z.shape[1]

    obj = _LikelihoodObjective(Z, ys)
    bounds = [(-LOG_BOUND, LOG_BOUND)] * (n + 1) + [MEAN_BOUNDS]
    rng = np.random.default_rng(seed)
    starts = [_heuristic_start(Z, ys)]
    for _ in range(n_starts - 1):
        starts.append(np.concatenate([rng.uniform(-LOG_BOUND, LOG_BOUND, n + 1),
                                      [rng.uniform(0.0, 1.0)]]))
    best_theta, best_val = None, np.inf
    for t0 in starts:
        t0 = np.clip(t0, [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(obj, t0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": maxiter})
        val = float(res.fun)
        if np.isfinite(val) and val < best_val:
            best_val, best_theta = val, res.x
    if best_theta is None or best_val >= 1e10:
        raise GPFitError("likelihood optimization found no factorizable kernel")
    params = KernelParams.from_vector(best_theta)
    log.debug("gp fit: k=%d n=%d nll=%.6g a0=%.3g", Z.shape[0], n, best_val, params.output_scale)
    return build_trained_gp(Z, ys, params, domain, y_min, y_max)


# ---------------------------------------------------------------------------
# queries in unit-cube coordinates


def _as_batch(gp, Z):
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if Z.shape[1] != gp.dim:
        raise ValueError(f"expected points of length {gp.dim}")
    return Z


def _coincident(A, B, r2, w):
    """Index pairs (a, b) with ``max_i |A[a, i] - B[b, i]| <= COINCIDE_TOL``."""
    # weighted distance prefilter, then an exact check on the few candidates
    a_idx, b_idx = np.nonzero(r2 <= COINCIDE_TOL ** 2 * w.sum())
    keep = [np.abs(A[a] - B[b]).max() <= COINCIDE_TOL for a, b in zip(a_idx, b_idx)]
    keep = np.asarray(keep, dtype=bool)
    return a_idx[keep], b_idx[keep]


def _cross_cov(gp, Z):
    """Prior covariance between query rows and the training points, with the nugget."""
    p = gp.params
    r2 = _sqdist(Z, gp.X_scaled, p.inv_lengthscales)
    Ks = _matern_from_r2(r2, p.output_scale)
    a, b = _coincident(Z, gp.X_scaled, r2, p.inv_lengthscales)
    Ks[a, b] += gp.jitter
    return Ks


def predict(gp: TrainedGP, Z):
    """Posterior mean and variance at unit-cube points, scaled space.

    Returns
    -------
    mean, var : (m,) arrays
    """
    Z = _as_batch(gp, Z)
    p = gp.params
    Ks = _cross_cov(gp, Z)
    mean = p.constant_mean + Ks @ gp.alpha_vec
    V = solve_triangular(gp.chol, Ks.T, lower=True)
    prior = p.output_scale + gp.jitter
    var = np.clip(prior - (V * V).sum(axis=0), 0.0, prior)
    return mean, var


def joint_moments(gp: TrainedGP, Z):
    """Mean, symmetrized covariance (diagonal >= 0) and ``L^-1 K(X, Z)`` at unit-cube rows."""
    Z = _as_batch(gp, Z)
    p = gp.params
    Ks = _cross_cov(gp, Z)
    mean = p.constant_mean + Ks @ gp.alpha_vec
    V = solve_triangular(gp.chol, Ks.T, lower=True)
    r2 = _sqdist(Z, Z, p.inv_lengthscales)
    K = _matern_from_r2(r2, p.output_scale)
    a, b = _coincident(Z, Z, r2, p.inv_lengthscales)
    K[a, b] += gp.jitter
    C = K - V.T @ V
    C = 0.5 * (C + C.T)
    idx = np.diag_indices_from(C)
    C[idx] = np.maximum(C[idx], 0.0)
    return mean, C, V


def predict_cov(gp: TrainedGP, Z):
    """Joint posterior covariance at unit-cube points, shape (q, q)."""
    C = joint_moments(gp, Z)[1]
    idx = np.diag_indices_from(C)
    C[idx] = np.minimum(C[idx], gp.params.output_scale + gp.jitter)
    return C


def _kgrad_sum(gp, A, C):
    """Rows ``sum_c C[a, c] * grad_x k(A[a], X[c])`` for every ``a``."""
    p = gp.params
    X = gp.X_scaled
    r2 = _sqdist(A, X, p.inv_lengthscales)
    M = C * (2.0 * _dk_dr2(r2, p.output_scale))
    return p.inv_lengthscales * (M.sum(axis=1)[:, None] * A - M @ X)


def predict_gradients(gp: TrainedGP, Z):
    """Gradients of the posterior mean and variance at unit-cube points.

    Returns
    -------
    grad_mean, grad_var : (m, n) arrays
    """
    Z = _as_batch(gp, Z)
    p = gp.params
    Ks = _cross_cov(gp, Z)
    m = Z.shape[0]
    grad_mean = _kgrad_sum(gp, Z, np.broadcast_to(gp.alpha_vec, (m, gp.n_obs)))
    B = cho_solve((gp.chol, True), Ks.T).T  # K^-1 k(z, X), per row
    grad_var = -2.0 * _kgrad_sum(gp, Z, B)
    return grad_mean, grad_var


# ---------------------------------------------------------------------------
# queries in domain coordinates


def posterior(gp: TrainedGP, x) -> Posterior:
    z = gp.domain.to_unit(np.asarray(x, dtype=np.float64))
    mean, var = predict(gp, z[None, :])
    return Posterior(float(mean[0]), float(var[0]))


def posterior_mean_unscaled(gp: TrainedGP, x) -> float:
    return gp.y_min + (gp.y_max - gp.y_min) * posterior(gp, x).mean


def posterior_cov(gp: TrainedGP, Xq):
    Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
    return predict_cov(gp, gp.domain.to_unit(Xq))


def posterior_gradients(gp: TrainedGP, x):
    """Gradients of mean and variance with respect to unit-cube coordinates."""
    z = gp.domain.to_unit(np.asarray(x, dtype=np.float64))
    gm, gv = predict_gradients(gp, z[None, :])
    return gm[0], gv[0]
