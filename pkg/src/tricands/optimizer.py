"""Sequential optimization loops: BO with pluggable acquisition, raw baselines.

A run starts from a uniform random design of size ``n0`` (deliberately not
space-filling), then alternates surrogate refit, inner acquisition search,
and objective evaluation until ``n_end`` total evaluations.  Strategies that
share a seed see the identical initial design, which is what makes paired
Monte Carlo comparisons meaningful.  The non-surrogate baselines spend the
same evaluation budget on restarted Nelder-Mead directly on the objective.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .acquisition import (
    argmax_ei_candidates,
    hybrid_ei,
    multistart_local_ei,
    ts_candidates,
)
from .candidates import CandidateSet, SubsampleConfig, lhs_candidates, tricands
from .errors import DegenerateInput, TooFewPoints, TriangulationFailed
from .surrogate import DesignState, FitConfig, fit_gp

logger = logging.getLogger(__name__)

TRICAND_STRATEGIES = ("EI-tri", "TS-tri", "EI-hyb")
LHS_STRATEGIES = ("EI-lhs", "TS-lhs")
NUMERIC_STRATEGIES = ("EI",)
RAW_STRATEGIES = ("NelderMead-raw", "LBFGS-raw-equivalent")
STRATEGY_NAMES = (
    TRICAND_STRATEGIES + LHS_STRATEGIES + NUMERIC_STRATEGIES + RAW_STRATEGIES
)

# Acquisitions closer than this (sup-norm) to an existing row get jittered.
DUPLICATE_TOL = 1e-9
DUPLICATE_JITTER = 1e-6


@dataclass(frozen=True)
class Strategy:
    """An acquisition strategy plus its search budget knobs."""

    name: str
    candidate_cap: int = 0
    n_starts: int = 5

    def __post_init__(self):
        if self.name not in STRATEGY_NAMES:
            raise ValueError(
                f"unknown strategy {self.name!r}; known: {', '.join(STRATEGY_NAMES)}"
            )
        if self.name in TRICAND_STRATEGIES + LHS_STRATEGIES and self.candidate_cap < 1:
            raise ValueError(f"{self.name} requires candidate_cap >= 1")
        if self.name in NUMERIC_STRATEGIES and self.n_starts < 1:
            raise ValueError(f"{self.name} requires n_starts >= 1")


@dataclass
class RunRecord:
    """Everything persisted about one optimization run."""

    strategy: str
    seed: int
    n0: int
    n_end: int
    bov_trace: np.ndarray
    X_final: np.ndarray
    Y_final: np.ndarray
    per_acq_evals: np.ndarray
    criterion_evals_total: int
    wall_times: np.ndarray
    n_fallbacks: int = 0

    def bov_full(self) -> np.ndarray:
        """Running minimum over the whole evaluation history (n = 1..n_end)."""
        return np.minimum.accumulate(self.Y_final)


def init_design(d: int, n0: int, seed: int) -> np.ndarray:
    """n0 i.i.d. uniform points in the unit box (not space-filling)."""
    if n0 < d + 1:
        raise ValueError(f"n0 must be at least d+1={d + 1} so a triangulation exists")
    return np.random.default_rng(seed).uniform(size=(n0, d))


def _resolve_dim(objective, d) -> int:
    if d is not None:
        return int(d)
    dim = getattr(objective, "d", None)
    if dim is None:
        raise ValueError("pass d explicitly for objectives without a .d attribute")
    return int(dim)


def _jitter_duplicates(x, X, rng) -> np.ndarray:
    for _ in range(100):
        if np.abs(X - x).max(axis=1).min() > DUPLICATE_TOL:
            return x
        x = np.clip(
            x + rng.uniform(-DUPLICATE_JITTER, DUPLICATE_JITTER, size=x.size),
            0.0,
            1.0,
        )
    return x


def _make_candidates(strategy, design, d, cand_seed, fallbacks):
    if strategy.name in LHS_STRATEGIES:
        return CandidateSet.from_points(
            lhs_candidates(strategy.candidate_cap, d, seed=cand_seed), kind="random"
        )
    try:
        return tricands(
            design.X,
            SubsampleConfig(n_sub_max=strategy.candidate_cap, seed=cand_seed),
            best_index=design.best_index,
        )
    except (DegenerateInput, TriangulationFailed, TooFewPoints) as exc:
        logger.warning(
            "triangulation failed at n=%d (%s); using LHS candidates this iteration",
            design.n,
            exc,
        )
        fallbacks.append(1)
        return CandidateSet.from_points(
            lhs_candidates(strategy.candidate_cap, d, seed=cand_seed), kind="random"
        )


def run_bo(
    objective,
    strategy: Strategy,
    n0: int,
    n_end: int,
    seed: int,
    d: int = None,
) -> RunRecord:
    """Run a BO loop for ``n_end - n0`` acquisitions.

    The initial design depends only on ``(d, n0, seed)``; all strategy-side
    randomness (surrogate restarts, candidate subsampling, TS draws) comes
    from a separate stream so paired comparisons stay paired.
    """
    if strategy.name in RAW_STRATEGIES:
        return run_raw_neldermead(
            objective,
            n0,
            n_end,
            seed,
            d=d,
            tight=strategy.name == "LBFGS-raw-equivalent",
            label=strategy.name,
        )
    d = _resolve_dim(objective, d)
    if not n0 < n_end:
        raise ValueError("need n0 < n_end")
    X = init_design(d, n0, seed)
    Y = np.array([objective(row) for row in X])
    rng = np.random.default_rng([seed, 1])

    bov, per_evals, walls, fallbacks = [], [], [], []
    for _ in range(n_end - n0):
        fit_seed, cand_seed, acq_seed = (
            int(s) for s in rng.integers(2**31, size=3)
        )
        design = DesignState.from_data(X, Y)
        t0 = time.perf_counter()
        fit = fit_gp(design, FitConfig(seed=fit_seed))
        if strategy.name == "EI":
            res = multistart_local_ei(
                fit, design, n_starts=strategy.n_starts, seed=acq_seed
            )
        else:
            cands = _make_candidates(strategy, design, d, cand_seed, fallbacks)
            if strategy.name in ("EI-tri", "EI-lhs"):
                res = argmax_ei_candidates(fit, design, cands)
            elif strategy.name in ("TS-tri", "TS-lhs"):
                res = ts_candidates(fit, cands, seed=acq_seed)
            else:
                res = hybrid_ei(fit, design, cands, seed=acq_seed)
        x_next = _jitter_duplicates(res.x_next, X, rng)
        walls.append(time.perf_counter() - t0)
        y_next = objective(x_next)
        X = np.vstack([X, x_next[None, :]])
        Y = np.append(Y, y_next)
        bov.append(float(Y.min()))
        per_evals.append(res.n_criterion_evals)

    per_evals = np.array(per_evals, dtype=int)
    return RunRecord(
        strategy=strategy.name,
        seed=seed,
        n0=n0,
        n_end=n_end,
        bov_trace=np.array(bov),
        X_final=X,
        Y_final=Y,
        per_acq_evals=per_evals,
        criterion_evals_total=int(per_evals.sum()),
        wall_times=np.array(walls),
        n_fallbacks=len(fallbacks),
    )


class _BudgetExhausted(Exception):
    pass


def run_raw_neldermead(
    objective,
    n0: int,
    n_end: int,
    seed: int,
    d: int = None,
    tight: bool = False,
    label: str = "NelderMead-raw",
) -> RunRecord:
    """Restarted Nelder-Mead directly on the objective, box-projected.

    Spends exactly ``n_end`` objective evaluations.  ``tight`` shrinks the
    per-restart convergence tolerances (the stand-in for a more aggressive
    local optimizer); the default tolerances restart more often.
    """
    d = _resolve_dim(objective, d)
    if not 0 <= n0 < n_end:
        raise ValueError("need 0 <= n0 < n_end")
    rng = np.random.default_rng(seed)
    values, points, times = [], [], []
    t_prev = time.perf_counter()

    def f(x):
        nonlocal t_prev
        if len(values) >= n_end:
            raise _BudgetExhausted
        x = np.clip(x, 0.0, 1.0)
        v = float(objective(x))
        now = time.perf_counter()
        values.append(v)
        points.append(x.copy())
        times.append(now - t_prev)
        t_prev = now
        return v

    options = (
        {"xatol": 1e-8, "fatol": 1e-8, "maxfev": n_end}
        if tight
        else {"xatol": 1e-4, "fatol": 1e-4, "maxfev": n_end}
    )
    while len(values) < n_end:
        start = rng.uniform(size=d)
        try:
            minimize(
                f,
                start,
                method="Nelder-Mead",
                bounds=[(0.0, 1.0)] * d,
                options=options,
            )
        except _BudgetExhausted:
            break

    values = np.array(values)
    running_min = np.minimum.accumulate(values)
    n_acq = n_end - n0
    return RunRecord(
        strategy=label,
        seed=seed,
        n0=n0,
        n_end=n_end,
        bov_trace=running_min[n0:],
        X_final=np.array(points),
        Y_final=values,
        per_acq_evals=np.zeros(n_acq, dtype=int),
        criterion_evals_total=0,
        wall_times=np.array(times[n0:]),
    )
