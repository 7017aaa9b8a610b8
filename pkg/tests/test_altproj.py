import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from conftest import random_tt, rank_one_chebyshev_oracle, rank_one_lower_bound_i2
from ttmax import (
    APConfig,
    TTTensor,
    alternating_projections,
    binary_search_epsilon,
    identity_tensor,
    project_ball,
    quasi_project_lowrank,
    random_tt_init,
    tt_to_dense,
)
from ttmax.tensor import unfold

finite = st.floats(-1e6, 1e6, allow_nan=False)


# -- ball projection -------------------------------------------------------------

def test_project_ball_examples():
    assert project_ball(np.array(2.0), np.array(0.0), 0.5) == 0.5
    x = np.array([0.1, -0.2])
    np.testing.assert_array_equal(project_ball(x, np.zeros(2), 0.5), x)
    with pytest.raises(ValueError):
        project_ball(np.zeros(2), np.zeros(3), 0.1)
    with pytest.raises(ValueError):
        project_ball(np.zeros(2), np.zeros(2), -0.1)


@settings(max_examples=100)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(
    hnp.arrays(np.float64, n, elements=finite), hnp.arrays(np.float64, n, elements=finite))),
    st.floats(0, 1e3))
def test_project_ball_properties(pair, eps):
    x, a = pair
    y = project_ball(x, a, eps)
    assert np.max(np.abs(y - a)) <= eps + 1e-14 * max(1.0, np.max(np.abs(a)))
    np.testing.assert_array_equal(project_ball(y, a, eps), y)
    # per-entry nearest point of the interval [a - eps, a + eps]
    for xi, ai, yi in zip(x, a, y):
        lo, hi = ai - eps, ai + eps
        want = min(max(xi, lo), hi)
        assert yi == pytest.approx(want, abs=1e-12 * max(1.0, abs(ai)))


# -- low-rank quasi-projection --------------------------------------------------------

def test_quasi_projection_exact_on_low_rank():
    tt = random_tt((3, 4, 3), (2, 2), seed=4)
    a = tt_to_dense(tt)
    out = quasi_project_lowrank(a, 2)
    assert np.max(np.abs(tt_to_dense(out) - a)) <= 1e-10
    with pytest.raises(ValueError):
        quasi_project_lowrank(a, 0)


def test_quasi_projection_matrix_is_optimal(rng):
    a = rng.standard_normal((6, 5))
    s = np.linalg.svd(a, compute_uv=False)
    err = np.linalg.norm(tt_to_dense(quasi_project_lowrank(a, 2)) - a)
    assert err == pytest.approx(math.sqrt(np.sum(s[2:] ** 2)), rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_quasi_projection_quasioptimal(seed):
    a = np.random.default_rng(seed).standard_normal((4, 3, 4, 3))
    r = 2
    tails = [math.sqrt(np.sum(np.linalg.svd(unfold(a, t), compute_uv=False)[r:] ** 2))
             for t in range(1, 4)]
    err = np.linalg.norm(tt_to_dense(quasi_project_lowrank(a, r)) - a)
    # the best rank-r error is at least max(tails)
    assert err <= math.sqrt(3) * max(tails) * (1 + 1e-10)


# -- alternating projections ----------------------------------------------------------

def test_config_validation():
    for kwargs in ({"rank": 0}, {"rank": 1, "max_iter": 0}, {"rank": 1, "conv_tol": 0.0},
                   {"rank": 1, "slack": -1.0}):
        with pytest.raises(ValueError):
            APConfig(**kwargs)


def test_immediate_success():
    a = identity_tensor(3, 2)
    x0 = random_tt_init(a.shape, 1, seed=0)
    eps = np.max(np.abs(a - tt_to_dense(x0))) + 1.0
    rep, _ = alternating_projections(a, eps, APConfig(1), x0)
    assert rep.success and rep.iterations_used == 1


def test_i2_rank_one_feasible_at_055():
    a = np.eye(2)
    rep, x = alternating_projections(a, 0.55, APConfig(1), random_tt_init((2, 2), 1, seed=0))
    assert rep.success
    assert np.max(np.abs(tt_to_dense(x) - a)) <= 0.55 * (1 + 1e-6)


def test_i2_rank_one_infeasible_at_03():
    a = np.eye(2)
    assert not rank_one_lower_bound_i2(0.3)
    rep, x = alternating_projections(a, 0.3, APConfig(1), random_tt_init((2, 2), 1, seed=0))
    assert not rep.success
    assert rep.residual_max > 0.3


def test_history_matches_recomputation():
    a = np.random.default_rng(3).uniform(-1, 1, (5, 6))
    cfg = APConfig(2, max_iter=30)
    rep, x = alternating_projections(a, 0.05, cfg, random_tt_init(a.shape, 2, seed=1))
    assert len(rep.history) == rep.iterations_used
    assert rep.residual_max == pytest.approx(np.max(np.abs(a - tt_to_dense(x))), abs=1e-12)
    assert rep.history[-1] == rep.residual_max


def test_alternating_projections_errors():
    a = np.eye(3)
    with pytest.raises(ValueError):
        alternating_projections(a, 0.1, APConfig(1), random_tt_init((3, 4), 1, seed=0))
    with pytest.raises(ValueError):
        alternating_projections(a, 0.1, APConfig(1), random_tt_init((3, 3), 2, seed=0))
    bad = a.copy()
    bad[0, 0] = np.nan
    with pytest.raises(FloatingPointError):
        alternating_projections(bad, 0.1, APConfig(1), random_tt_init((3, 3), 1, seed=0))


# -- binary search ----------------------------------------------------------------

def test_grid_oracle_optimum_for_i2():
    opt = rank_one_chebyshev_oracle(np.eye(2), angles=2001)
    assert opt == pytest.approx(0.5, abs=1e-12)
    assert rank_one_lower_bound_i2(0.5) and not rank_one_lower_bound_i2(0.5 - 1e-9)


def test_binary_search_i2_rank_one():
    rep, x = binary_search_epsilon(np.eye(2), APConfig(1))
    assert 0.5 <= rep.epsilon_achieved <= 0.6
    assert np.max(np.abs(tt_to_dense(x) - np.eye(2))) <= rep.epsilon_achieved * (1 + 1e-6)


@pytest.mark.parametrize("dims, ranks", [((4, 5), (2,)), ((3, 4, 3), (2, 3)), ((3, 3, 3), (1, 1))])
def test_binary_search_exact_rank(dims, ranks):
    a = tt_to_dense(random_tt(dims, ranks, seed=8))
    rep, _ = binary_search_epsilon(a, APConfig(max(ranks)))
    assert rep.epsilon_achieved <= 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_binary_search_witness_certifies(seed):
    a = np.random.default_rng(seed).uniform(-1, 1, (6, 6))
    cfg = APConfig(2, max_iter=100, seed=seed)
    rep, x = binary_search_epsilon(a, cfg, restarts=2)
    got = np.max(np.abs(tt_to_dense(x) - a))
    assert got <= rep.epsilon_achieved * (1 + cfg.slack)
    assert rep.residual_max == pytest.approx(got, abs=1e-12)
    assert rep.epsilon_achieved <= np.max(np.abs(a))


def test_restarts_never_hurt():
    a = np.random.default_rng(5).uniform(-1, 1, (5, 5))
    one, _ = binary_search_epsilon(a, APConfig(2, max_iter=80, seed=3), restarts=1)
    three, _ = binary_search_epsilon(a, APConfig(2, max_iter=80, seed=3), restarts=3)
    assert three.epsilon_achieved <= one.epsilon_achieved
    assert three.iterations_used > one.iterations_used


def test_binary_search_deterministic():
    a = np.random.default_rng(1).uniform(-1, 1, (4, 4))
    r1, x1 = binary_search_epsilon(a, APConfig(1, max_iter=50, seed=7))
    r2, x2 = binary_search_epsilon(a, APConfig(1, max_iter=50, seed=7))
    assert r1.epsilon_achieved == r2.epsilon_achieved
    np.testing.assert_array_equal(tt_to_dense(x1), tt_to_dense(x2))


def test_binary_search_zero_tensor():
    rep, x = binary_search_epsilon(np.zeros((3, 3)), APConfig(1))
    assert rep.epsilon_achieved == 0.0 and rep.converged


def test_binary_search_monotone_in_rank_identity():
    a = identity_tensor(12, 2)
    eps = [binary_search_epsilon(a, APConfig(r, max_iter=200))[0].epsilon_achieved
           for r in (2, 4, 8, 12)]
    assert all(x >= y for x, y in zip(eps, eps[1:]))
    assert eps[-1] <= 1e-6


def test_binary_search_rejects_bad_input():
    with pytest.raises(ValueError):
        binary_search_epsilon(np.eye(2), APConfig(1), restarts=0)
    with pytest.raises(FloatingPointError):
        binary_search_epsilon(np.array([[np.inf, 0.0], [0.0, 1.0]]), APConfig(1))
