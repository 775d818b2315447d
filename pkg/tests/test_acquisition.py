"""Acquisition criteria: closed forms vs Monte Carlo, searches vs grid oracles."""

import numpy as np
import pytest
from scipy.stats import norm

from tricands.acquisition import (
    AcqResult,
    EvalTally,
    argmax_ei_candidates,
    ei,
    hybrid_ei,
    multistart_local_ei,
    ts_candidates,
)
from tricands.candidates import CandidateSet
from tricands.surrogate import DesignState, FitConfig, fit_gp, predict


def mc_ei(mu, sd, f_min, n_draws, seed):
    """Monte Carlo estimate of E[max(0, f_min - Y)] with its standard error."""
    draws = np.random.default_rng(seed).normal(mu, sd, size=n_draws)
    imp = np.clip(f_min - draws, 0.0, None)
    return imp.mean(), imp.std(ddof=1) / np.sqrt(n_draws)


def _fit_1d(seed=0, n=8):
    rng = np.random.default_rng(seed)
    X = np.sort(rng.uniform(size=(n, 1)), axis=0)
    Y = np.sin(6.0 * X[:, 0])
    ds = DesignState.from_data(X, Y)
    return fit_gp(ds, FitConfig(seed=seed)), ds


def test_ei_at_zero_z_is_standard_normal_density():
    assert ei(1.0, 1.0, 1.0) == pytest.approx(norm.pdf(0.0), abs=1e-12)
    assert ei(1.0, 1.0, 1.0) == pytest.approx(0.398942, abs=1e-6)


def test_ei_zero_sd_is_zero():
    assert ei(0.0, 0.0, 1.0) == 0.0
    assert ei(5.0, 1e-13, 1.0) == 0.0


def test_ei_unit_gap_value():
    expected = norm.cdf(1.0) + norm.pdf(1.0)
    assert ei(-1.0, 1.0, 0.0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1.08332, abs=1e-5)


def test_ei_matches_monte_carlo():
    rng = np.random.default_rng(42)
    for i in range(10):
        mu = rng.normal()
        sd = rng.uniform(0.1, 2.0)
        f_min = rng.normal()
        closed = ei(mu, sd, f_min)
        est, se = mc_ei(mu, sd, f_min, n_draws=10**5, seed=i)
        assert abs(closed - est) <= 3.0 * se + 1e-12


def test_ei_nonnegative_and_increasing_in_sd():
    mus = np.linspace(-2.0, 2.0, 21)
    sds = np.linspace(0.01, 3.0, 40)
    for mu in mus:
        vals = ei(np.full_like(sds, mu), sds, f_min=-0.5)
        assert np.all(vals >= 0.0)
        if mu > -0.5:  # mu above the incumbent: improvement only via sd
            assert np.all(np.diff(vals) > 0.0)


def test_ei_vectorized_matches_scalar():
    mu = np.array([0.0, 0.5, -1.0])
    sd = np.array([1.0, 0.0, 2.0])
    vec = ei(mu, sd, 0.2)
    assert vec.shape == (3,)
    for i in range(3):
        assert vec[i] == pytest.approx(ei(mu[i], sd[i], 0.2), abs=1e-14)


def test_argmax_single_candidate():
    fit, ds = _fit_1d()
    cands = CandidateSet.from_points(np.array([[0.5]]))
    res = argmax_ei_candidates(fit, ds, cands)
    assert np.allclose(res.x_next, [0.5])
    assert res.n_criterion_evals == 1


def test_argmax_prefers_gap_over_training_point():
    fit, ds = _fit_1d(seed=3)
    gaps = (ds.X[1:, 0] + ds.X[:-1, 0]) / 2.0
    widest = int(np.argmax(np.diff(ds.X[:, 0])))
    cands = CandidateSet.from_points(
        np.array([[ds.X[0, 0]], [gaps[widest]]])
    )
    res = argmax_ei_candidates(fit, ds, cands)
    assert np.allclose(res.x_next, [gaps[widest]])


def test_argmax_equals_exhaustive_scan():
    fit, ds = _fit_1d(seed=5, n=10)
    pts = np.random.default_rng(6).uniform(size=(40, 1))
    cands = CandidateSet.from_points(pts)
    res = argmax_ei_candidates(fit, ds, cands)
    mu, sd = predict(fit, pts)
    vals = np.array([ei(m, s, ds.f_min) for m, s in zip(mu, sd)])
    assert res.criterion_value == pytest.approx(vals.max(), abs=1e-14)
    assert np.allclose(res.x_next, pts[np.argmax(vals)])
    assert res.n_criterion_evals == 40


def test_argmax_tie_break_lowest_mean_then_index():
    fit, ds = _fit_1d(seed=7)
    # two training points: EI exactly ties near zero; lower predicted mean wins
    lo = int(np.argmin(ds.Y))
    hi = int(np.argmax(ds.Y))
    pts = ds.X[[hi, lo]]
    res = argmax_ei_candidates(fit, ds, CandidateSet.from_points(pts))
    mu, sd = predict(fit, pts)
    vals = ei(mu, sd, ds.f_min)
    if vals[0] == vals[1]:
        assert np.allclose(res.x_next, pts[np.argmin(mu)])


def test_ts_single_candidate():
    fit, _ = _fit_1d(seed=8)
    cands = CandidateSet.from_points(np.array([[0.77]]))
    res = ts_candidates(fit, cands, seed=0)
    assert np.allclose(res.x_next, [0.77])
    assert res.n_criterion_evals == 1


def test_ts_on_training_points_selects_incumbent():
    fit, ds = _fit_1d(seed=9)
    cands = CandidateSet.from_points(ds.X)
    for seed in range(5):
        res = ts_candidates(fit, cands, seed=seed)
        assert np.allclose(res.x_next, ds.X[ds.best_index])


def test_ts_frequencies_match_mvn_oracle():
    fit, ds = _fit_1d(seed=10, n=6)
    pts = np.array([[0.1], [0.3], [0.55], [0.8]])
    cands = CandidateSet.from_points(pts)
    m = 10**4
    picks = np.zeros(len(pts))
    for seed in range(m):
        res = ts_candidates(fit, cands, seed=seed)
        picks[np.argmin(np.abs(pts[:, 0] - res.x_next[0]))] += 1
    freq = picks / m

    mu, _, cov = predict(fit, pts, full_cov=True)
    draws = np.random.default_rng(123).multivariate_normal(mu, cov, size=m)
    oracle = np.bincount(np.argmin(draws, axis=1), minlength=len(pts)) / m
    se = np.sqrt(np.clip(oracle * (1 - oracle), 1e-12, None) / m)
    assert np.all(np.abs(freq - oracle) <= 3.0 * se + 2e-2)


def test_multistart_matches_grid_oracle_single_mode():
    # Data pinned to the x2=0 edge gives a single global EI basin near the
    # incumbent; the basin top is a shallow plateau, so the oracle check is
    # value dominance over a 10^4-point grid plus same-basin proximity.
    X = np.array([[0.2, 0.0], [0.8, 0.0]])
    Y = np.array([0.0, 1.0])
    ds = DesignState.from_data(X, Y)
    fit = fit_gp(ds, FitConfig(lengthscales=np.array([0.08, 0.08])))
    res = multistart_local_ei(fit, ds, n_starts=8, seed=12)

    g = np.linspace(0.0, 1.0, 100)
    grid = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    mu, sd = predict(fit, grid)
    vals = ei(mu, sd, ds.f_min)
    best = grid[np.argmax(vals)]
    assert res.criterion_value >= vals.max() - 1e-9
    # plateau top spans ~0.1; anything farther would be a different basin
    assert np.linalg.norm(res.x_next - best) < 0.15


def test_multistart_ascends_from_given_start():
    fit, ds = _fit_1d(seed=13)
    start = np.array([[0.5]])
    mu, sd = predict(fit, start)
    start_val = ei(mu[0], sd[0], ds.f_min)
    res = multistart_local_ei(fit, ds, starts=start, seed=14)
    assert res.criterion_value >= start_val - 1e-12


def test_multistart_uses_more_evals_than_candidates():
    fit, ds = _fit_1d(seed=15)
    cands = CandidateSet.from_points(np.random.default_rng(16).uniform(size=(50, 1)))
    cand_res = argmax_ei_candidates(fit, ds, cands)
    multi_res = multistart_local_ei(fit, ds, n_starts=5, seed=17)
    assert multi_res.n_criterion_evals > cand_res.n_criterion_evals


def test_hybrid_never_worse_than_candidates():
    for seed in range(5):
        fit, ds = _fit_1d(seed=20 + seed)
        cands = CandidateSet.from_points(
            np.random.default_rng(seed).uniform(size=(20, 1))
        )
        cand_res = argmax_ei_candidates(fit, ds, cands)
        hyb_res = hybrid_ei(fit, ds, cands, seed=seed)
        assert hyb_res.criterion_value >= cand_res.criterion_value - 1e-12
        # hybrid evals = candidate sweep + the polishing local search
        assert hyb_res.n_criterion_evals > cand_res.n_criterion_evals


def test_hybrid_flat_surface_returns_candidate_winner():
    X = np.random.default_rng(30).uniform(size=(6, 2))
    ds = DesignState.from_data(X, np.full(6, 2.0))
    fit = fit_gp(ds)
    cands = CandidateSet.from_points(np.random.default_rng(31).uniform(size=(10, 2)))
    cand_res = argmax_ei_candidates(fit, ds, cands)
    hyb_res = hybrid_ei(fit, ds, cands, seed=32)
    assert np.allclose(hyb_res.x_next, cand_res.x_next)


def test_argmax_invariant_under_affine_response_transform():
    rng = np.random.default_rng(33)
    X = rng.uniform(size=(12, 2))
    Y = np.sin(5.0 * X[:, 0]) + np.cos(3.0 * X[:, 1])
    theta = np.array([0.2, 0.2])
    pts = rng.uniform(size=(30, 2))
    cands = CandidateSet.from_points(pts)

    base = DesignState.from_data(X, Y)
    fit = fit_gp(base, FitConfig(lengthscales=theta))
    res = argmax_ei_candidates(fit, base, cands)

    for a, b in [(2.5, 0.0), (0.3, -4.0), (10.0, 7.0)]:
        scaled = DesignState.from_data(X, a * Y + b)
        fit_s = fit_gp(scaled, FitConfig(lengthscales=theta))
        res_s = argmax_ei_candidates(fit_s, scaled, cands)
        assert np.allclose(res.x_next, res_s.x_next)
        assert res_s.criterion_value == pytest.approx(
            a * res.criterion_value, rel=1e-8
        )


def test_eval_tally_accumulates_across_searches():
    fit, ds = _fit_1d(seed=34)
    cands = CandidateSet.from_points(np.random.default_rng(35).uniform(size=(15, 1)))
    tally = EvalTally()
    r1 = argmax_ei_candidates(fit, ds, cands, tally=tally)
    r2 = multistart_local_ei(fit, ds, n_starts=2, seed=36, tally=tally)
    r3 = ts_candidates(fit, cands, seed=37, tally=tally)
    r4 = hybrid_ei(fit, ds, cands, seed=38, tally=tally)
    total = sum(r.n_criterion_evals for r in (r1, r2, r3, r4))
    assert tally.count == total
    assert all(
        r.n_criterion_evals >= 1 for r in (r1, r2, r3, r4)
    )


def test_acq_result_fields():
    fit, ds = _fit_1d(seed=39)
    cands = CandidateSet.from_points(np.array([[0.25], [0.75]]))
    res = argmax_ei_candidates(fit, ds, cands)
    assert isinstance(res, AcqResult)
    assert 0.0 <= res.x_next[0] <= 1.0
    assert res.method_tag == "ei-cand"
    assert res.converged
