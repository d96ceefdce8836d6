import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laprep.chain import (
    average_reward,
    check_ergodic,
    solve_poisson,
    solve_poisson_fundamental,
    stationary_distribution,
)
from laprep.errors import NotErgodic, NotStochastic
from laprep.synthetic import random_ergodic_chain


def brute_force_primitive(P, limit):
    """Float matrix powers; fine for the tiny chains used here."""
    Q = np.eye(P.shape[0])
    for _ in range(limit):
        Q = Q @ P
        if np.all(Q > 0):
            return True
    return False


def test_check_ergodic_examples():
    assert check_ergodic(np.full((2, 2), 0.5))
    assert not check_ergodic(np.eye(2))
    assert not check_ergodic(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(NotStochastic):
        check_ergodic(np.array([[0.5, 0.6], [0.5, 0.5]]))


def test_check_ergodic_matches_brute_force(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        P = (rng.random((n, n)) < 0.35) * rng.random((n, n))
        for i in range(n):
            if P[i].sum() == 0:
                P[i, rng.integers(n)] = 1.0
        P = P / P.sum(axis=1, keepdims=True)
        assert check_ergodic(P) == brute_force_primitive(P, n * n)


def test_check_ergodic_respects_max_power():
    # 3-cycle with one self-loop has exponent > 1
    P = np.array([[0.5, 0.5, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert check_ergodic(P)
    assert not check_ergodic(P, max_power=1)


def test_stationary_examples():
    np.testing.assert_allclose(stationary_distribution(np.full((2, 2), 0.5)), [0.5, 0.5], atol=1e-15)
    phi = stationary_distribution(np.array([[0.9, 0.1], [0.5, 0.5]]))
    np.testing.assert_allclose(phi, [5 / 6, 1 / 6], atol=1e-15)
    np.testing.assert_array_equal(stationary_distribution(np.array([[1.0]])), [1.0])
    with pytest.raises(NotErgodic):
        stationary_distribution(np.eye(2))


def test_average_reward_examples():
    rho, r_bar = average_reward([0.25, 0.75], [3.0, 3.0])
    assert rho == 3.0 and np.all(r_bar == 0)
    rho, r_bar = average_reward([0.5, 0.5], [1.0, 0.0])
    assert rho == 0.5
    np.testing.assert_allclose(r_bar, [0.5, -0.5])
    rho, r_bar = average_reward([5 / 6, 1 / 6], [0.0, 6.0])
    assert rho == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(r_bar, [-1.0, 5.0], atol=1e-14)


def test_poisson_examples(two_state):
    sol = solve_poisson(np.array([[1.0]]), [4.0])
    assert sol.rho == 4.0 and sol.v[0] == 0.0
    P, r = two_state
    sol = solve_poisson(P, r)
    np.testing.assert_allclose(sol.v, [0.5, -0.5], atol=1e-15)
    assert sol.rho == 0.5
    P = random_ergodic_chain(7, np.random.default_rng(0))
    assert np.abs(solve_poisson(P, np.full(7, 2.5)).v).max() < 1e-13


def test_poisson_matches_truncated_series(rng):
    """v = sum_t P^t r_bar for aperiodic chains (the series converges geometrically)."""
    P = random_ergodic_chain(6, rng, density=1.0)
    r = rng.standard_normal(6)
    sol = solve_poisson(P, r)
    acc = np.zeros(6)
    term = sol.r_bar.copy()
    for _ in range(5000):
        acc += term
        term = P @ term
    np.testing.assert_allclose(sol.v, acc - sol.phi @ acc, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_poisson_invariants_and_two_paths(n, seed):
    rng = np.random.default_rng(seed)
    P = random_ergodic_chain(n, rng)
    r = rng.standard_normal(n)
    a = solve_poisson(P, r)
    b = solve_poisson_fundamental(P, r)
    assert a.poisson_residual(P) <= 1e-8
    assert a.normalization() <= 1e-10
    assert abs(a.phi.sum() - 1) <= 1e-12
    assert np.abs(a.phi @ P - a.phi).max() <= 1e-10
    assert np.abs(a.v - b.v).max() <= 1e-9


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 30), seed=st.integers(0, 2**32 - 1))
def test_bijective_on_zero_mean_subspace(n, seed):
    rng = np.random.default_rng(seed)
    P = random_ergodic_chain(n, rng)
    phi = stationary_distribution(P)
    basis = np.linalg.qr(np.column_stack([phi, np.eye(n)[:, :-1]]))[0][:, 1:]
    M = np.eye(n) - P
    smin = np.linalg.svd(M @ basis, compute_uv=False).min()
    assert smin / np.linalg.norm(M, 2) > 1e-10
