import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laprep.errors import DimensionMismatch, NotOrthonormal, NotSymmetric, Singular
from laprep.numlin import principal_angles, solve_linear, sym_eig, weighted_norm, weighted_opnorm
from laprep.synthetic import random_orthonormal


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_sym_eig_identity(method):
    lam, Q = sym_eig(np.eye(3), method=method)
    np.testing.assert_allclose(lam, [1, 1, 1])
    np.testing.assert_allclose(Q.T @ Q, np.eye(3), atol=1e-12)
    for j in range(3):
        nz = Q[np.abs(Q[:, j]) > 1e-12, j]
        assert nz[0] > 0


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_sym_eig_diagonal(method):
    lam, Q = sym_eig(np.diag([3.0, 1.0, 2.0]), method=method)
    np.testing.assert_allclose(lam, [1, 2, 3])
    np.testing.assert_allclose(Q, np.eye(3)[:, [1, 2, 0]], atol=1e-14)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_sym_eig_random_20(rng, method):
    A = rng.standard_normal((20, 20))
    A = A + A.T
    lam, Q = sym_eig(A, method=method)
    assert np.linalg.norm(A @ Q - Q * lam) < 1e-9 * np.linalg.norm(A)
    assert np.linalg.norm(Q.T @ Q - np.eye(20)) < 1e-10
    assert np.all(np.diff(lam) >= 0)


def test_jacobi_matches_lapack_spectrum(rng):
    A = rng.standard_normal((12, 12))
    A = A + A.T
    np.testing.assert_allclose(sym_eig(A, method="jacobi")[0], np.linalg.eigvalsh(A), atol=1e-12)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_eig_tolerates_roundoff_asymmetry():
    A = np.array([[2.0, 1.0], [1.0 + 1e-14, 2.0]])
    lam, _ = sym_eig(A)
    np.testing.assert_allclose(lam, [1.0, 3.0])


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 50), seed=st.integers(0, 2**32 - 1))
def test_sym_eig_property(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A = A + A.T
    lam, Q = sym_eig(A)
    assert np.linalg.norm(A @ Q - Q * lam) <= 1e-9 * np.linalg.norm(A)
    assert np.linalg.norm(Q.T @ Q - np.eye(n)) <= 1e-10


def test_solve_linear_examples(rng):
    b = rng.standard_normal(4)
    np.testing.assert_array_equal(solve_linear(np.eye(4), b), b)
    np.testing.assert_allclose(solve_linear(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])
    A = rng.standard_normal((15, 15)) + 15 * np.eye(15)
    b = rng.standard_normal(15)
    x = solve_linear(A, b)
    bound = 1e-10 * (np.linalg.norm(A, np.inf) * np.abs(x).max() + np.abs(b).max())
    assert np.abs(A @ x - b).max() <= bound


def test_solve_linear_singular():
    with pytest.raises(Singular):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        solve_linear(np.eye(2), [1.0, 2.0, 3.0])


def test_weighted_norm_examples():
    assert weighted_norm([0.0, 0.0], [0.5, 0.5]) == 0.0
    assert weighted_norm([1.0, 1.0], [0.5, 0.5]) == pytest.approx(1.0, abs=1e-15)
    # sqrt(0.5 * 0.25 + 0.5 * 0.25)
    assert weighted_norm([0.5, -0.5], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DimensionMismatch):
        weighted_norm([1.0], [0.5, 0.5])


def test_weighted_opnorm_examples(rng):
    phi = rng.dirichlet(np.ones(4))
    assert weighted_opnorm(np.eye(4), phi) == pytest.approx(1.0, abs=1e-12)
    assert weighted_opnorm(np.zeros((4, 4)), phi) == 0.0
    assert weighted_opnorm(np.diag([2.0, 3.0]), np.array([0.9, 0.1])) == pytest.approx(3.0, abs=1e-12)


def test_weighted_opnorm_matches_definition(rng):
    """Brute-force max of ||Ax||_phi / ||x||_phi over many directions."""
    A = rng.standard_normal((3, 3))
    phi = rng.dirichlet(np.ones(3))
    xs = rng.standard_normal((200_000, 3))
    ratio = np.sqrt((phi * (xs @ A.T) ** 2).sum(1) / (phi * xs**2).sum(1))
    val = weighted_opnorm(A, phi)
    assert ratio.max() <= val + 1e-12
    assert ratio.max() > val * 0.999


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 20), seed=st.integers(0, 2**32 - 1))
def test_weighted_opnorm_uniform_is_spectral(n, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    assert abs(weighted_opnorm(A, np.full(n, 1.0 / n)) - np.linalg.norm(A, 2)) <= 1e-10


def test_principal_angles_examples(rng):
    X = random_orthonormal(6, 3, rng)
    np.testing.assert_allclose(principal_angles(X, X), 0.0, atol=1e-7)
    E = np.eye(4)
    np.testing.assert_allclose(principal_angles(E[:, :2], E[:, 2:]), np.pi / 2)
    with pytest.raises(NotOrthonormal):
        principal_angles(2 * E[:, :2], E[:, 2:])


@settings(max_examples=50, deadline=None)
@given(n=st.integers(3, 15), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_sin_theta_frobenius_identity(n, seed, data):
    k = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(seed)
    X = random_orthonormal(n, k, rng)
    Y = random_orthonormal(n, k, rng)
    theta = principal_angles(X, Y)
    lhs = np.linalg.norm(X @ X.T - Y @ Y.T) ** 2
    assert abs(lhs - 2 * np.sum(np.sin(theta) ** 2)) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_sym_inverse_inequality(n, seed):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((n, n))
    K = rng.standard_normal((n, n))
    A = S @ S.T + 0.1 * np.eye(n) + (K - K.T)
    sym = (A + A.T) / 2
    Ainv = np.linalg.inv(A)
    diff = np.linalg.inv(sym) - (Ainv + Ainv.T) / 2
    assert np.linalg.eigvalsh((diff + diff.T) / 2).min() >= -1e-10
