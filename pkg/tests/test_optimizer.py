"""Outer-loop tests: budgets, pairing, monotone progress, raw baselines."""

import numpy as np
import pytest
from scipy.stats import kstest

from tricands.benchfn import get_benchmark
from tricands.optimizer import (
    RAW_STRATEGIES,
    Strategy,
    _jitter_duplicates,
    _make_candidates,
    init_design,
    run_bo,
    run_raw_neldermead,
)
from tricands.surrogate import DesignState


class Bowl:
    """Convex quadratic with known minimum, for fast deterministic runs."""

    d = 2
    x_star = np.array([0.3, 0.6])

    def __call__(self, x):
        return float(((np.asarray(x) - self.x_star) ** 2).sum())


def test_init_design_shape_bounds_determinism():
    X = init_design(3, 12, seed=4)
    assert X.shape == (12, 3)
    assert np.all((X >= 0.0) & (X <= 1.0))
    assert np.array_equal(X, init_design(3, 12, seed=4))
    assert not np.array_equal(X, init_design(3, 12, seed=5))


def test_init_design_requires_enough_points():
    with pytest.raises(ValueError):
        init_design(4, 4, seed=0)


def test_init_design_marginals_uniform_ks():
    pooled = np.concatenate(
        [init_design(2, 50, seed=s)[:, 0] for s in range(100)]
    )
    assert pooled.size == 5000
    assert kstest(pooled, "uniform").pvalue > 0.01


def test_run_bo_budget_arithmetic():
    bench = get_benchmark("goldstein-price")
    rec = run_bo(bench, Strategy("EI-tri", candidate_cap=50), 12, 50, seed=0)
    assert rec.bov_trace.shape == (38,)
    assert rec.X_final.shape == (50, 2)
    assert rec.Y_final.shape == (50,)
    assert np.all(np.diff(rec.bov_trace) <= 0.0)
    assert np.all(rec.per_acq_evals <= 50)
    assert rec.criterion_evals_total == rec.per_acq_evals.sum()
    assert rec.bov_trace[-1] == rec.Y_final.min()


def test_strategies_share_initial_design():
    bench = get_benchmark("goldstein-price")
    a = run_bo(bench, Strategy("EI-tri", candidate_cap=30), 12, 16, seed=9)
    b = run_bo(bench, Strategy("EI-lhs", candidate_cap=30), 12, 16, seed=9)
    c = run_bo(bench, Strategy("EI"), 12, 16, seed=9)
    assert np.array_equal(a.X_final[:12], b.X_final[:12])
    assert np.array_equal(a.X_final[:12], c.X_final[:12])
    assert not np.array_equal(a.X_final[12:], b.X_final[12:])


def test_run_bo_deterministic_per_seed():
    bench = get_benchmark("gramacy-lee-2d")
    a = run_bo(bench, Strategy("TS-tri", candidate_cap=25), 8, 14, seed=3)
    b = run_bo(bench, Strategy("TS-tri", candidate_cap=25), 8, 14, seed=3)
    assert np.array_equal(a.X_final, b.X_final)
    assert np.array_equal(a.bov_trace, b.bov_trace)
    assert np.array_equal(a.per_acq_evals, b.per_acq_evals)


def test_run_bo_hybrid_runs_and_counts():
    bench = get_benchmark("gramacy-lee-2d")
    rec = run_bo(bench, Strategy("EI-hyb", candidate_cap=25), 8, 13, seed=1)
    assert np.all(rec.per_acq_evals > 25)  # candidate sweep plus local polish


def test_run_bo_dispatches_raw_names():
    bench = get_benchmark("gramacy-lee-2d")
    rec = run_bo(bench, Strategy("NelderMead-raw"), 8, 20, seed=2)
    assert rec.strategy == "NelderMead-raw"
    assert rec.Y_final.shape == (20,)
    assert rec.criterion_evals_total == 0


def test_raw_neldermead_budget_and_bowl_convergence():
    rec = run_raw_neldermead(Bowl(), 12, 50, seed=0)
    assert len(rec.Y_final) == 50
    assert rec.bov_trace.shape == (38,)
    assert np.all(np.diff(rec.bov_trace) <= 0.0)
    assert rec.bov_trace[-1] < 1e-3


def test_raw_neldermead_deterministic():
    a = run_raw_neldermead(Bowl(), 5, 40, seed=7)
    b = run_raw_neldermead(Bowl(), 5, 40, seed=7)
    assert np.array_equal(a.Y_final, b.Y_final)
    assert np.array_equal(a.X_final, b.X_final)


def test_raw_variants_differ():
    # budget must outlast the first loose-tolerance convergence (~120 evals
    # here) so the restart schedules actually diverge
    bench = get_benchmark("goldstein-price")
    loose = run_raw_neldermead(bench, 5, 150, seed=1, tight=False)
    tight = run_raw_neldermead(
        bench, 5, 150, seed=1, tight=True, label="LBFGS-raw-equivalent"
    )
    assert tight.strategy == "LBFGS-raw-equivalent"
    assert not np.array_equal(loose.Y_final, tight.Y_final)


def test_jitter_moves_duplicates_off_existing_rows():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(6, 2))
    moved = _jitter_duplicates(X[2].copy(), X, rng)
    assert np.abs(X - moved).max(axis=1).min() > 1e-9
    assert np.all((moved >= 0.0) & (moved <= 1.0))
    fresh = np.array([0.9, 0.9])
    assert np.array_equal(_jitter_duplicates(fresh.copy(), X, rng), fresh)


def test_geometry_failure_falls_back_to_lhs():
    # collinear-but-distinct design: triangulation impossible, LHS takes over
    t = np.linspace(0.1, 0.9, 6)
    design = DesignState.from_data(
        np.column_stack([t, t]), np.linspace(0.0, 1.0, 6)
    )
    fallbacks = []
    cands = _make_candidates(
        Strategy("EI-tri", candidate_cap=20), design, 2, 123, fallbacks
    )
    assert cands.N == 20
    assert fallbacks == [1]
    assert set(cands.kinds) == {"random"}


def test_strategy_validation():
    with pytest.raises(ValueError):
        Strategy("EI-quux")
    with pytest.raises(ValueError):
        Strategy("EI-tri", candidate_cap=0)
    with pytest.raises(ValueError):
        Strategy("EI", n_starts=0)
    assert Strategy("NelderMead-raw").name in RAW_STRATEGIES


def test_plain_callable_needs_dimension():
    with pytest.raises(ValueError):
        run_bo(lambda x: 0.0, Strategy("EI-lhs", candidate_cap=5), 4, 8, seed=0)
    rec = run_bo(
        lambda x: float((np.asarray(x) ** 2).sum()),
        Strategy("EI-lhs", candidate_cap=5),
        4,
        8,
        seed=0,
        d=2,
    )
    assert rec.X_final.shape == (8, 2)
