"""Acquisition criteria and the inner searches that optimize them.

Expected improvement has the usual closed form

    EI(x) = (f_min - mu(x)) Phi(z) + sd(x) phi(z),   z = (f_min - mu) / sd,

and Thompson sampling draws one joint realization of the surrogate over the
candidate set and takes its argmin.  Every criterion evaluation is counted:
a vectorized sweep over N candidates costs N, and one N-dimensional TS draw
is likewise booked as N.  Counts are returned with each acquisition and can
additionally be accumulated in a shared :class:`EvalTally`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from .candidates import CandidateSet
from .errors import EmptyCandidates
from .surrogate import DesignState, GpFit, predict, sample_paths

# Below this predictive sd the improvement integral degenerates to zero.
SD_FLOOR = 1e-12


@dataclass
class EvalTally:
    """Mutable counter of criterion evaluations, mergeable across chunks."""

    count: int = 0

    def add(self, k: int = 1):
        self.count += int(k)


@dataclass(frozen=True)
class AcqResult:
    """Outcome of one inner optimization."""

    x_next: np.ndarray
    criterion_value: float
    n_criterion_evals: int
    method_tag: str
    converged: bool = True


def ei(mu, sd, f_min: float):
    """Expected improvement below ``f_min``; zero wherever sd vanishes."""
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    out = np.zeros(np.broadcast(mu, sd).shape)
    live = sd > SD_FLOOR
    if np.any(live):
        mu_l = np.broadcast_to(mu, out.shape)[live]
        sd_l = np.broadcast_to(sd, out.shape)[live]
        z = (f_min - mu_l) / sd_l
        out[live] = (f_min - mu_l) * norm.cdf(z) + sd_l * norm.pdf(z)
    out = np.clip(out, 0.0, None)
    return float(out) if out.ndim == 0 else out


def argmax_ei_candidates(
    fit: GpFit,
    data: DesignState,
    cands: CandidateSet,
    tally: EvalTally = None,
) -> AcqResult:
    """Exhaustive EI over the candidate set.

    Ties on the criterion are broken by lower predictive mean, then by lower
    candidate index, so the result is deterministic.
    """
    if cands.N < 1:
        raise EmptyCandidates("no candidates to score")
    mu, sd = predict(fit, cands.points)
    vals = ei(mu, sd, data.f_min)
    if tally is not None:
        tally.add(cands.N)
    ties = np.nonzero(vals == vals.max())[0]
    best = ties[np.argmin(mu[ties])]
    return AcqResult(
        x_next=cands.points[best].copy(),
        criterion_value=float(vals[best]),
        n_criterion_evals=cands.N,
        method_tag="ei-cand",
    )


def ts_candidates(
    fit: GpFit,
    cands: CandidateSet,
    seed: int = 0,
    tally: EvalTally = None,
) -> AcqResult:
    """Thompson sampling: argmin of one joint predictive draw."""
    if cands.N < 1:
        raise EmptyCandidates("no candidates to score")
    draw = sample_paths(fit, cands.points, n_draws=1, seed=seed)[0]
    if tally is not None:
        tally.add(cands.N)
    best = int(np.argmin(draw))
    return AcqResult(
        x_next=cands.points[best].copy(),
        criterion_value=float(draw[best]),
        n_criterion_evals=cands.N,
        method_tag="ts-cand",
    )


def multistart_local_ei(
    fit: GpFit,
    data: DesignState,
    n_starts: int = 5,
    starts: np.ndarray = None,
    seed: int = 0,
    tally: EvalTally = None,
) -> AcqResult:
    """Multistart derivative-free local maximization of EI over the box.

    Each restart runs bounded Nelder-Mead from a uniform random point (or a
    supplied start); every objective call scores EI once and is counted.
    Non-convergence of a restart still contributes its best-seen point, with
    ``converged`` flagged False on the result.
    """
    d = data.d
    if starts is not None:
        starts = np.atleast_2d(np.asarray(starts, dtype=float))
    else:
        if n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        starts = np.random.default_rng(seed).uniform(size=(n_starts, d))
    evals = 0

    def neg_ei(x):
        nonlocal evals
        evals += 1
        mu, sd = predict(fit, x[None, :])
        return -ei(mu[0], sd[0], data.f_min)

    best_x, best_val, all_ok = None, -np.inf, True
    for start in starts:
        res = minimize(
            neg_ei,
            np.clip(start, 0.0, 1.0),
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * d,
        )
        all_ok = all_ok and bool(res.success)
        if -res.fun > best_val:
            best_val, best_x = float(-res.fun), np.clip(res.x, 0.0, 1.0)
    if tally is not None:
        tally.add(evals)
    return AcqResult(
        x_next=best_x,
        criterion_value=best_val,
        n_criterion_evals=evals,
        method_tag="ei-multistart",
        converged=all_ok,
    )


def hybrid_ei(
    fit: GpFit,
    data: DesignState,
    cands: CandidateSet,
    seed: int = 0,
    tally: EvalTally = None,
) -> AcqResult:
    """Candidate EI winner used to seed one local search; best of the two."""
    cand_res = argmax_ei_candidates(fit, data, cands, tally=tally)
    local_res = multistart_local_ei(
        fit, data, starts=cand_res.x_next[None, :], seed=seed, tally=tally
    )
    evals = cand_res.n_criterion_evals + local_res.n_criterion_evals
    if local_res.criterion_value > cand_res.criterion_value:
        return AcqResult(
            x_next=local_res.x_next,
            criterion_value=local_res.criterion_value,
            n_criterion_evals=evals,
            method_tag="ei-hybrid",
            converged=local_res.converged,
        )
    return AcqResult(
        x_next=cand_res.x_next,
        criterion_value=cand_res.criterion_value,
        n_criterion_evals=evals,
        method_tag="ei-hybrid",
        converged=local_res.converged,
    )
