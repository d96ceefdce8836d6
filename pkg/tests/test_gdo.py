import numpy as np
import pytest

from laprep.chain import stationary_distribution
from laprep.errors import NotOrthonormal, RankDeficient
from laprep.gdo import (
    GdoConfig,
    gdo_grad,
    gdo_loss,
    gdo_residual,
    learn_representation,
    optimize_gdo,
    phi_gram_error,
    phi_orthonormalize,
    sampled_loss,
    write_trace,
)
from laprep.spectral import build_laplacian, spectrum
from laprep.synthetic import random_ergodic_chain


@pytest.fixture
def small_problem(rng):
    P = random_ergodic_chain(10, rng)
    phi = stationary_distribution(P)
    L = build_laplacian(P, phi)
    return P, phi, L, spectrum(L, phi)


def test_loss_examples(small_problem):
    P, phi, L, b = small_problem
    k = 3
    assert gdo_loss(b.basis(k), L, phi, 5.0) == pytest.approx(2 * b.lambdas[:k].sum(), abs=1e-12)
    assert gdo_loss(np.zeros((10, k)), L, phi, 5.0) == pytest.approx(5.0 * k)
    X = np.ones((2, 1))
    assert gdo_loss(X, np.array([[0.5, -0.5], [-0.5, 0.5]]), [0.5, 0.5], 2.0) == 0.0


def test_gradient_central_difference(small_problem, rng):
    _, phi, L, _ = small_problem
    X = rng.standard_normal((10, 3))
    g = gdo_grad(X, L, phi, 4.0)
    h = 1e-6
    num = np.zeros_like(X)
    for idx in np.ndindex(*X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        num[idx] = (gdo_loss(X + E, L, phi, 4.0) - gdo_loss(X - E, L, phi, 4.0)) / (2 * h)
    assert np.linalg.norm(g - num) <= 1e-6 * np.linalg.norm(g)


def test_monte_carlo_matches_closed_form(small_problem, rng):
    P, phi, L, _ = small_problem
    X = rng.standard_normal((10, 2))
    mean, se = sampled_loss(X, P, phi, 3.0, 100_000, np.random.default_rng(7))
    assert abs(mean - gdo_loss(X, L, phi, 3.0)) <= 3 * se


def test_two_state_minimum(two_state):
    P, _ = two_state
    phi = np.array([0.5, 0.5])
    L = build_laplacian(P, phi)
    res = optimize_gdo(P, L, phi, GdoConfig(k=1, iterations=3000))
    # minimum over the constant direction is 0; k=1 picks it, the only loss is the penalty
    assert res.trace[-1][1] <= 1e-3


def test_optimizer_recovers_eigenspace(small_problem):
    P, phi, L, b = small_problem
    rep = learn_representation(P, L, phi, b.lambdas, GdoConfig(k=3, iterations=5000))
    assert rep.epsilon < 1e-8
    Pi = b.basis(3) @ b.basis(3).T * phi[None, :]
    np.testing.assert_allclose(Pi @ rep.Psi_hat, rep.Psi_hat, atol=1e-4)


def test_optimizer_is_deterministic(small_problem):
    P, phi, L, _ = small_problem
    cfg = GdoConfig(k=2, iterations=200, seed=3)
    a = optimize_gdo(P, L, phi, cfg)
    b = optimize_gdo(P, L, phi, cfg)
    np.testing.assert_array_equal(a.X, b.X)
    assert a.trace == b.trace
    c = optimize_gdo(P, L, phi, GdoConfig(k=2, iterations=200, seed=4))
    assert not np.array_equal(a.X, c.X)


def test_loss_decreases_in_full_mode(small_problem):
    P, phi, L, _ = small_problem
    trace = optimize_gdo(P, L, phi, GdoConfig(k=3, iterations=300)).trace
    losses = np.array([v for _, v in trace])
    assert len(trace) == 301
    assert np.all(np.diff(losses) <= 1e-12)


def test_stochastic_mode_reduces_loss(small_problem):
    P, phi, L, b = small_problem
    cfg = GdoConfig(k=2, iterations=3000, mode="stochastic", step_size=0.002, batch=128)
    res = optimize_gdo(P, L, phi, cfg)
    assert res.trace[-1][1] < 0.5 * res.trace[0][1]
    assert res.trace[-1][1] < 2 * b.lambdas[:2].sum() + 0.5


def test_config_validation():
    for bad in ({"k": 0}, {"k": 1, "beta": 0}, {"k": 1, "mode": "adam"}, {"k": 1, "iterations": -1}):
        with pytest.raises(ValueError):
            GdoConfig(**bad)
    with pytest.raises(ValueError):
        optimize_gdo(np.full((2, 2), 0.5), np.eye(2), [0.5, 0.5], GdoConfig(k=2))


def test_orthonormalize_examples(rng):
    phi = np.array([0.5, 0.5])
    np.testing.assert_allclose(phi_orthonormalize([[2.0], [2.0]], phi), [[1.0], [1.0]])
    with pytest.raises(RankDeficient):
        phi_orthonormalize(np.ones((3, 2)), np.full(3, 1 / 3))
    phi = rng.dirichlet(np.ones(20))
    X = rng.standard_normal((20, 5))
    Q = phi_orthonormalize(X, phi)
    assert phi_gram_error(Q, phi) <= 1e-12
    # same column span, upper-triangular change of basis
    T = np.linalg.lstsq(X, Q, rcond=None)[0]
    np.testing.assert_allclose(X @ T, Q, atol=1e-10)
    np.testing.assert_allclose(np.tril(T, -1), 0, atol=1e-10)


def test_residual_examples(small_problem):
    _, phi, L, b = small_problem
    assert gdo_residual(b.basis(2), L, phi, b.lambdas) == pytest.approx(0.0, abs=1e-12)
    swapped = b.U[:, [0, 2]]
    assert gdo_residual(swapped, L, phi, b.lambdas) == pytest.approx(b.lambdas[2] - b.lambdas[1], abs=1e-12)
    with pytest.raises(NotOrthonormal):
        gdo_residual(2 * b.basis(2), L, phi, b.lambdas)


def test_write_trace(tmp_path):
    path = tmp_path / "trace.csv"
    write_trace([(0, 1.5), (1, 0.25)], path)
    assert path.read_text().splitlines() == ["iteration,loss", "0,1.5", "1,0.25"]
