"""Gaussian-process regression surrogate.

Anisotropic squared-exponential kernel on coded inputs,

    k(x, x') = tau^2 * exp(-sum_k (x_k - x'_k)^2 / theta_k),

with a small multiplicative nugget g on the correlation diagonal.  Responses
are standardized internally (zero mean, unit sd) so the prior mean is the
data mean; the signal variance tau^2 is profiled out in closed form and the
lengthscales are chosen by multistart Nelder-Mead on the log marginal
likelihood.  Fits are immutable and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .candidates import lhs_candidates
from .errors import CovNotPSD, FitFailed, SingularKernel

# Jitter ladder for factoring predictive covariances, applied on the
# standardized (unit signal variance) scale.
JITTER_START = 1e-10
JITTER_MAX = 1e-6


@dataclass(frozen=True)
class DesignState:
    """Evaluated design: inputs X in the unit box, responses Y, incumbent."""

    X: np.ndarray
    Y: np.ndarray
    f_min: float
    best_index: int

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        Y = np.ascontiguousarray(np.asarray(self.Y, dtype=float).ravel())
        if X.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ValueError("X must be n x d with one response per row")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("design values must be finite")
        if Y.size:
            if self.f_min != float(Y.min()):
                raise ValueError("f_min inconsistent with Y")
            if Y[self.best_index] != self.f_min:
                raise ValueError("best_index inconsistent with Y")
        if X.shape[0] > 1:
            gaps = np.abs(X[:, None, :] - X[None, :, :]).max(axis=2)
            gaps[np.diag_indices_from(gaps)] = np.inf
            if gaps.min() <= 1e-12:
                raise ValueError("duplicate design rows within 1e-12")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @classmethod
    def from_data(cls, X, Y) -> "DesignState":
        Y = np.asarray(Y, dtype=float).ravel()
        best = int(np.argmin(Y))
        return cls(X=X, Y=Y, f_min=float(Y[best]), best_index=best)

    def append(self, x, y: float) -> "DesignState":
        X = np.vstack([self.X, np.asarray(x, dtype=float)[None, :]])
        return DesignState.from_data(X, np.append(self.Y, float(y)))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameter search settings for :func:`fit_gp`.

    Setting ``lengthscales`` skips the likelihood search and fits with the
    given values (used by oracles and tests).
    """

    n_starts: int = 5
    nugget: float = 1e-8
    nugget_max: float = 1e-2
    theta_lo: float = 1e-3
    theta_hi: float = 10.0
    seed: int = 0
    lengthscales: np.ndarray | None = None


@dataclass(frozen=True)
class GpFit:
    """Fitted surrogate: hyperparameters plus factored training covariance.

    ``chol`` is the lower Cholesky factor of the correlation matrix plus
    nugget, C + g*I; ``alpha`` solves (C + g*I) alpha = y_std.  ``scale`` is
    the profiled signal variance on the original response scale, so the
    predictive variance at x is scale * (1 - k(x)' (C+gI)^-1 k(x)).
    """

    X: np.ndarray
    lengthscales: np.ndarray
    scale: float
    nugget: float
    chol: np.ndarray
    alpha: np.ndarray
    loglik: float
    y_mean: float
    y_sd: float


def sq_dists(X1: np.ndarray, X2: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Lengthscale-weighted squared distances sum_k (x_k - x'_k)^2 / theta_k."""
    diff = X1[:, None, :] - X2[None, :, :]
    return (diff**2 / theta[None, None, :]).sum(axis=2)


def corr_matrix(X1: np.ndarray, X2: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return np.exp(-sq_dists(X1, X2, theta))


def _standardize(Y: np.ndarray):
    mean = float(Y.mean())
    sd = float(Y.std())
    if sd < 1e-12:
        sd = 1.0
    return (Y - mean) / sd, mean, sd


def _factor_corr(X: np.ndarray, theta: np.ndarray, nugget: float) -> np.ndarray:
    M = corr_matrix(X, X, theta)
    M[np.diag_indices_from(M)] += nugget
    try:
        return cholesky(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularKernel(f"Cholesky failed at nugget {nugget:g}") from exc


def _neg_loglik(log_theta, X, y_std, nugget, lo, hi):
    theta = np.exp(np.clip(log_theta, np.log(lo), np.log(hi)))
    n = X.shape[0]
    M = corr_matrix(X, X, theta)
    M[np.diag_indices_from(M)] += nugget
    try:
        L = cholesky(M, lower=True)
    except np.linalg.LinAlgError:
        return 1e25
    alpha = cho_solve((L, True), y_std)
    tausq = max(float(y_std @ alpha) / n, 1e-300)
    return 0.5 * n * np.log(tausq) + np.log(np.diag(L)).sum()


def fit_gp(data: DesignState, cfg: FitConfig = None) -> GpFit:
    """Fit the surrogate by maximizing the log marginal likelihood.

    Lengthscales are searched with Nelder-Mead on log(theta) from
    ``n_starts`` Latin hypercube starting points over the log-space box; the
    signal variance is profiled in closed form at each evaluation.  A
    singular correlation matrix at the selected hyperparameters escalates the
    nugget by factors of ten up to ``nugget_max`` before giving up.
    """
    cfg = cfg or FitConfig()
    if data.n < 2:
        raise ValueError("need at least two observations to fit")
    y_std, y_mean, y_sd = _standardize(data.Y)
    X = data.X
    d = data.d
    lo, hi = cfg.theta_lo, cfg.theta_hi

    if cfg.lengthscales is not None:
        theta = np.asarray(cfg.lengthscales, dtype=float)
        if theta.shape != (d,) or np.any(theta <= 0):
            raise ValueError("lengthscales must be d positive values")
    else:
        log_lo, log_hi = np.log(lo), np.log(hi)
        starts = log_lo + (log_hi - log_lo) * lhs_candidates(
            cfg.n_starts, d, seed=cfg.seed
        )
        best_val, best_log_theta = np.inf, starts[0]
        for start in starts:
            res = minimize(
                _neg_loglik,
                start,
                args=(X, y_std, cfg.nugget, lo, hi),
                method="Nelder-Mead",
                bounds=[(log_lo, log_hi)] * d,
            )
            if res.fun < best_val:
                best_val, best_log_theta = float(res.fun), res.x
        theta = np.exp(np.clip(best_log_theta, np.log(lo), np.log(hi)))

    nugget = cfg.nugget
    while True:
        try:
            L = _factor_corr(X, theta, nugget)
            break
        except SingularKernel:
            nugget *= 10.0
            if nugget > cfg.nugget_max:
                raise FitFailed(
                    f"correlation matrix singular up to nugget {cfg.nugget_max:g}"
                ) from None
    alpha = cho_solve((L, True), y_std)
    n = data.n
    tausq_std = max(float(y_std @ alpha) / n, 0.0)
    loglik = (
        -0.5 * n * np.log(2.0 * np.pi)
        - 0.5 * n * np.log(max(tausq_std, 1e-300))
        - np.log(np.diag(L)).sum()
        - 0.5 * n
    )
    return GpFit(
        X=X.copy(),
        lengthscales=theta,
        scale=y_sd**2 * tausq_std,
        nugget=nugget,
        chol=L,
        alpha=alpha,
        loglik=float(loglik),
        y_mean=y_mean,
        y_sd=y_sd,
    )


def _std_cov_chol(cov_std: np.ndarray) -> tuple:
    """Factor a standardized predictive covariance, escalating jitter."""
    cov_std = 0.5 * (cov_std + cov_std.T)
    jitter = 0.0
    eye = np.eye(cov_std.shape[0])
    while True:
        try:
            L = cholesky(cov_std + jitter * eye, lower=True)
            return cov_std + jitter * eye, L
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX:
                raise CovNotPSD(
                    f"covariance not PSD after jitter up to {JITTER_MAX:g}"
                )


def predict(fit: GpFit, Xnew: np.ndarray, full_cov: bool = False):
    """Predictive mean and sd (and covariance) of the latent surface.

    Returns ``(mu, sd)`` or, with ``full_cov``, ``(mu, sd, cov)`` where cov
    has been symmetrized and jittered until positive semi-definite.
    """
    Xnew = np.atleast_2d(np.asarray(Xnew, dtype=float))
    k = corr_matrix(Xnew, fit.X, fit.lengthscales)
    mu = fit.y_mean + fit.y_sd * (k @ fit.alpha)
    w = solve_triangular(fit.chol, k.T, lower=True)
    if not full_cov:
        var = fit.scale * np.clip(1.0 - (w**2).sum(axis=0), 0.0, None)
        return mu, np.sqrt(var)
    cov_std = corr_matrix(Xnew, Xnew, fit.lengthscales) - w.T @ w
    cov_std, _ = _std_cov_chol(cov_std)
    cov = fit.scale * cov_std
    sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return mu, sd, cov


def sample_paths(
    fit: GpFit, Xnew: np.ndarray, n_draws: int, seed: int = 0
) -> np.ndarray:
    """Joint draws from the predictive distribution, one row per draw."""
    Xnew = np.atleast_2d(np.asarray(Xnew, dtype=float))
    k = corr_matrix(Xnew, fit.X, fit.lengthscales)
    mu = fit.y_mean + fit.y_sd * (k @ fit.alpha)
    w = solve_triangular(fit.chol, k.T, lower=True)
    cov_std = corr_matrix(Xnew, Xnew, fit.lengthscales) - w.T @ w
    _, L = _std_cov_chol(cov_std)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_draws, Xnew.shape[0]))
    return mu[None, :] + np.sqrt(fit.scale) * (z @ L.T)
