"""Acquisition functions for the baseline strategies.

Closed-form EI and LCB for single points, quasi-Monte-Carlo q-EI and q-LCB
for batches, and a multi-start bounded quasi-Newton optimizer for them.
Everything is in the GP's scaled output space and minimization-oriented:
improvement is measured below the incumbent, and a batch's LCB is the
minimum over its members.

The MC estimators use a frozen matrix of Sobol normal samples so that, for a
fixed draw, the estimate is a deterministic, almost-everywhere differentiable
function of the batch. Gradients are pathwise through ``y = mu + Z L^T``;
ties in the inner min are resolved in favour of the first index.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize
from scipy.special import logsumexp, ndtr, ndtri
from scipy.stats import qmc

from .benchfns import BoxDomain
from .gp import TrainedGP, _dk_dr2, _sqdist, joint_moments, predict, predict_gradients

__all__ = [
    "MCConfig",
    "BatchCandidate",
    "MAX_SOBOL_DIM",
    "ei",
    "lcb",
    "ei_from_moments",
    "lcb_from_moments",
    "sobol_normal",
    "qei",
    "qlcb",
    "MCAcquisition",
    "ei_objective",
    "optimize_acquisition",
]

# size of the direction-number table shipped with scipy's Sobol generator
MAX_SOBOL_DIM = 21201
SIGMA_FLOOR = 1e-12
COV_JITTER = 1e-8


@dataclass(frozen=True)
class MCConfig:
    num_samples: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("num_samples must be >= 2")


@dataclass(frozen=True)
class BatchCandidate:
    points: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=np.float64)).copy()
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @property
    def q(self) -> int:
        return self.points.shape[0]


# ---------------------------------------------------------------------------
# closed forms


def ei_from_moments(mu, sigma, f_best):
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    imp = f_best - mu
    safe = np.maximum(sigma, SIGMA_FLOOR)
    z = imp / safe
    val = imp * ndtr(z) + safe * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    val = np.where(sigma < SIGMA_FLOOR, np.maximum(imp, 0.0), val)
    return np.maximum(val, 0.0)


def lcb_from_moments(mu, sigma, beta):
    return np.asarray(mu) - np.sqrt(beta) * np.asarray(sigma)


def ei(gp: TrainedGP, x, f_best: float) -> float:
    """Expected improvement below ``f_best`` at a domain point."""
    mu, var = predict(gp, gp.domain.to_unit(np.asarray(x, dtype=np.float64))[None, :])
    return float(ei_from_moments(mu[0], np.sqrt(var[0]), f_best))


def lcb(gp: TrainedGP, x, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    mu, var = predict(gp, gp.domain.to_unit(np.asarray(x, dtype=np.float64))[None, :])
    return float(lcb_from_moments(mu[0], np.sqrt(var[0]), beta))


def ei_objective(gp: TrainedGP, f_best: float):
    """Closed-form EI as an ``optimize_acquisition`` objective (q = 1)."""
    width = gp.domain.width

    def objective(X):
        Z = gp.domain.to_unit(X)
        mu, var = predict(gp, Z)
        sigma = np.sqrt(var)
        val = float(ei_from_moments(mu, sigma, f_best)[0])
        gm, gv = predict_gradients(gp, Z)
        if sigma[0] < SIGMA_FLOOR:
            g = -gm[0] if f_best > mu[0] else np.zeros_like(gm[0])
        else:
            z = (f_best - mu[0]) / sigma[0]
            # dEI/dmu = -Phi(z), dEI/dsigma = phi(z), dsigma = dvar / (2 sigma)
            g = -ndtr(z) * gm[0] + np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi) * gv[0] / (2 * sigma[0])
        return val, (g / width)[None, :]

    return objective


# ---------------------------------------------------------------------------
# Sobol normals


def sobol_normal(dim: int, count: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points pushed through the inverse normal CDF.

    Returns a ``(count, dim)`` matrix; the first ``count`` points of the
    seeded sequence are used.
    """
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    if dim > MAX_SOBOL_DIM:
        raise ValueError(f"Sobol direction numbers available up to dim {MAX_SOBOL_DIM}")
    eng = qmc.Sobol(d=dim, scramble=True, seed=np.random.default_rng(seed))
    with warnings.catch_warnings():
        # non-power-of-two counts are fine for our use
        warnings.simplefilter("ignore", UserWarning)
        u = eng.random(count)
    # scrambled points are never exactly 0 or 1, but stay safe
    u = np.clip(u, 1e-16, 1.0 - 1e-16)
    return ndtri(u)


# ---------------------------------------------------------------------------
# MC batch acquisitions


def _cholesky_cov(C, scale):
    q = C.shape[0]
    jitter = COV_JITTER * scale
    for _ in range(7):
        try:
            return np.linalg.cholesky(C + jitter * np.eye(q))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FloatingPointError("posterior covariance not factorizable after jitter escalation")


def _chol_backward(L, Lbar):
    """Gradient w.r.t. a symmetric matrix given the gradient w.r.t. its Cholesky factor."""
    P = np.tril(L.T @ Lbar)
    P[np.diag_indices_from(P)] *= 0.5
    S = solve_triangular(L, solve_triangular(L, P.T, lower=True, trans="T").T,
                         lower=True, trans="T")
    # S = L^-T P L^-1
    return 0.5 * (S + S.T)


def _kgrad_rows(p, A, B, C):
    """Rows ``sum_b C[a, b] * grad_x k(A[a], B[b])``."""
    r2 = _sqdist(A, B, p.inv_lengthscales)
    M = C * (2.0 * _dk_dr2(r2, p.output_scale))
    return p.inv_lengthscales * (M.sum(axis=1)[:, None] * A - M @ B)


class MCAcquisition:
    """Frozen-sample q-EI or q-LCB on a trained GP.

    Parameters
    ----------
    gp : TrainedGP
    kind : {"qei", "qlcb"}
    base_samples : (S, q) array
        Standard normal draws, reused for every evaluation.
    f_best : float, optional
        Incumbent for q-EI (scaled space).
    beta : float, optional
        Exploration weight for q-LCB.
    smoothing : float
        If positive, the inner min, the positive part and the absolute value
        are replaced by smooth surrogates of that temperature. Used to check
        gradients; the optimizer runs with 0.
    """

    def __init__(self, gp, kind, base_samples, f_best=None, beta=None, smoothing=0.0):
        if kind not in ("qei", "qlcb"):
            raise ValueError(f"unknown MC acquisition {kind!r}")
        if kind == "qei" and f_best is None:
            raise ValueError("q-EI needs f_best")
        if kind == "qlcb" and (beta is None or beta < 0):
            raise ValueError("q-LCB needs beta >= 0")
        self.gp = gp
        self.kind = kind
        self.base = np.asarray(base_samples, dtype=np.float64)
        self.f_best = f_best
        self.beta = beta
        self.tau = float(smoothing)

    @property
    def q(self):
        return self.base.shape[1]

    def _moments(self, Z):
        return joint_moments(self.gp, Z)

    def _reduce(self, mu, L):
        """MC value plus gradients w.r.t. ``mu`` and ``L``."""
        S = self.base.shape[0]
        E = self.base @ L.T  # (S, q) centred draws
        tau = self.tau
        if self.kind == "qei":
            Y = mu + E
            if tau > 0:
                m = -tau * logsumexp(-Y / tau, axis=1)
                wts = np.exp((m[:, None] - Y) / tau)
                u = (self.f_best - m) / tau
                vals = tau * np.logaddexp(0.0, u)
                dval_dm = -1.0 / (1.0 + np.exp(-u))
                Ybar = (dval_dm[:, None] * wts) / S
            else:
                arg = np.argmin(Y, axis=1)
                m = Y[np.arange(S), arg]
                imp = self.f_best - m
                vals = np.maximum(imp, 0.0)
                Ybar = np.zeros_like(Y)
                Ybar[np.arange(S), arg] = np.where(imp > 0, -1.0 / S, 0.0)
            value = float(vals.mean())
            mubar = Ybar.sum(axis=0)
            Ebar = Ybar
        else:
            c = np.sqrt(self.beta * np.pi / 2.0)
            if tau > 0:
                absE = np.sqrt(E * E + tau * tau) - tau
                dabs = E / (absE + tau)
            else:
                absE = np.abs(E)
                dabs = np.sign(E)
            Y = mu - c * absE
            if tau > 0:
                m = -tau * logsumexp(-Y / tau, axis=1)
                wts = np.exp((m[:, None] - Y) / tau)
            else:
                arg = np.argmin(Y, axis=1)
                m = Y[np.arange(S), arg]
                wts = np.zeros_like(Y)
                wts[np.arange(S), arg] = 1.0
            value = float(m.mean())
            Ybar = wts / S
            mubar = Ybar.sum(axis=0)
            Ebar = -c * Ybar * dabs
        Lbar = np.tril(Ebar.T @ self.base)
        return value, mubar, Lbar

    def value_unit(self, Z):
        Z = np.atleast_2d(Z)
        mu, C, _ = self._moments(Z)
        L = _cholesky_cov(C, self.gp.params.output_scale)
        return self._reduce(mu, L)[0]

    def value_and_grad_unit(self, Z):
        """Value and gradient w.r.t. the unit-cube batch ``Z`` (q, n)."""
        gp = self.gp
        p = gp.params
        Z = np.atleast_2d(Z)
        mu, C, V = self._moments(Z)
        L = _cholesky_cov(C, p.output_scale)
        value, mubar, Lbar = self._reduce(mu, L)
        Sbar = _chol_backward(L, Lbar)
        # U = Sbar K(Z, X) K^-1
        U = solve_triangular(gp.chol, V @ Sbar, lower=True, trans="T").T
        A = mubar[:, None] * gp.alpha_vec[None, :] - 2.0 * U
        grad = _kgrad_rows(p, Z, gp.X_scaled, A) + 2.0 * _kgrad_rows(p, Z, Z, Sbar)
        return value, grad

    def __call__(self, X):
        """Objective in domain coordinates, oriented for maximization."""
        dom = self.gp.domain
        v, g = self.value_and_grad_unit(dom.to_unit(X))
        sign = 1.0 if self.kind == "qei" else -1.0
        return sign * v, sign * g / dom.width


def _batch_unit(gp, cand):
    P = cand.points if isinstance(cand, BatchCandidate) else np.atleast_2d(cand)
    return gp.domain.to_unit(P)


def qei(gp: TrainedGP, cand, f_best: float, mc: MCConfig = MCConfig()) -> float:
    """Monte-Carlo estimate of ``E[max(f_best - min_i y_i, 0)]``."""
    Z = _batch_unit(gp, cand)
    base = sobol_normal(Z.shape[0], mc.num_samples, mc.seed)
    return MCAcquisition(gp, "qei", base, f_best=f_best).value_unit(Z)


def qlcb(gp: TrainedGP, cand, beta: float, mc: MCConfig = MCConfig()) -> float:
    """Monte-Carlo estimate of ``E[min_i (mu_i - |y_i - mu_i|)]``.

    The draws have covariance ``beta * pi / 2 * Sigma`` so that for a single
    point the estimate tends to ``mu - sqrt(beta) * sigma``.
    """
    Z = _batch_unit(gp, cand)
    base = sobol_normal(Z.shape[0], mc.num_samples, mc.seed)
    return MCAcquisition(gp, "qlcb", base, beta=beta).value_unit(Z)


# ---------------------------------------------------------------------------
# inner optimizer


def optimize_acquisition(objective, domain: BoxDomain, q: int, starts: int = 100,
                         maxiter: int = 100, seed=0, n_refine: int = 10) -> BatchCandidate:
    """Maximize a batch objective over the box by multi-start L-BFGS-B.

    Parameters
    ----------
    objective : callable
        ``objective(X) -> (value, grad)`` with ``X`` a (q, n) batch in domain
        coordinates and ``grad`` of the same shape. Must be deterministic.
    domain : BoxDomain
    q : int
    starts : int
        Uniform random batches evaluated first.
    maxiter : int
        Quasi-Newton iterations per refined start.
    seed : int
    n_refine : int
        Number of best starts handed to the quasi-Newton solver.

    Returns
    -------
    BatchCandidate
        The best batch seen, never worse than the best start.
    """
    n = domain.dim
    rng = np.random.default_rng(seed)
    lo, w = domain.lower, domain.width
    U0 = rng.random((starts, q, n))
    vals = np.array([objective(lo + u * w)[0] for u in U0])
    order = np.argsort(-vals, kind="stable")
    best_u, best_v = U0[order[0]], vals[order[0]]

    def fun(uflat):
        u = np.clip(uflat.reshape(q, n), 0.0, 1.0)
        v, g = objective(lo + u * w)
        return -v, -(g * w).ravel()

    for i in order[:n_refine]:
        res = minimize(fun, U0[i].ravel(), jac=True, method="L-BFGS-B",
                       bounds=[(0.0, 1.0)] * (q * n),
                       options={"maxiter": maxiter, "maxcor": 10, "ftol": 1e-12, "gtol": 1e-9})
        u = np.clip(res.x.reshape(q, n), 0.0, 1.0)
        v = objective(lo + u * w)[0]
        if v > best_v:
            best_u, best_v = u, v
    return BatchCandidate(domain.from_unit(best_u))
