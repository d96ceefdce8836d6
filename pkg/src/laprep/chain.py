"""Markov-chain analysis: ergodicity, stationary distribution, Poisson equation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvariantViolated, NotErgodic, NotStochastic, Singular
from .numlin import as_matrix, as_vector, solve_linear


@dataclass(frozen=True)
class ValueSolution:
    rho: float
    r_bar: np.ndarray
    v: np.ndarray
    phi: np.ndarray

    def poisson_residual(self, P: np.ndarray) -> float:
        return float(np.max(np.abs(self.v - self.r_bar - P @ self.v)))

    def normalization(self) -> float:
        return float(abs(self.phi @ self.v))


def _check_stochastic(P: np.ndarray, tol: float = 1e-10) -> None:
    if P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"P must be square, got {P.shape}")
    if np.any(P < 0):
        raise NotStochastic("P has negative entries")
    dev = np.max(np.abs(P.sum(axis=1) - 1.0))
    if dev > tol:
        raise NotStochastic(f"row sums deviate from 1 by {dev:.3e}")


def check_ergodic(P, max_power: int | None = None) -> bool:
    """True iff some power ``P^t`` with ``t <= max_power`` is entrywise positive.

    Works on the support pattern only. Positivity of powers is monotone for
    primitive matrices, so it suffices to test ``P^max_power`` (by repeated
    squaring). Default ``max_power`` is ``|S|^2``, above Wielandt's bound.
    """
    P = as_matrix(P, "P")
    _check_stochastic(P)
    n = P.shape[0]
    if max_power is None:
        max_power = n * n
    if max_power < 1:
        raise ValueError("max_power must be >= 1")
    base = (P > 0).astype(np.float64)
    result = None
    e = max_power
    while e:
        if e & 1:
            result = base if result is None else np.minimum(result @ base, 1.0)
        e >>= 1
        if e:
            base = np.minimum(base @ base, 1.0)
    return bool(np.all(result > 0))


def stationary_distribution(P, tol: float = 1e-12, polish_steps: int = 50) -> np.ndarray:
    P = as_matrix(P, "P")
    if not check_ergodic(P):
        raise NotErgodic("P is not irreducible and aperiodic")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        phi = solve_linear(A, b)
    except Singular as exc:
        raise NotErgodic(f"stationary system is singular: {exc}") from exc
    for _ in range(polish_steps):
        if np.max(np.abs(phi @ P - phi)) <= tol:
            break
        phi = phi @ P
        phi = phi / phi.sum()
    phi = phi / phi.sum()
    if np.any(phi <= 0):
        raise NotErgodic("stationary distribution has non-positive entries")
    return phi


def average_reward(phi, r) -> tuple[float, np.ndarray]:
    phi = as_vector(phi, "phi")
    r = as_vector(r, "r")
    if phi.shape != r.shape:
        raise DimensionMismatch(f"phi has length {phi.size}, r has length {r.size}")
    rho = float(phi @ r)
    r_bar = r - rho
    # second centering pass removes the O(eps * |r|) drift of the first
    r_bar = r_bar - float(phi @ r_bar)
    return rho, r_bar


def solve_poisson(P, r, phi=None) -> ValueSolution:
    """Differential value function with the normalization ``phi^T v = 0``.

    Solves the stacked system ``[(I - P); phi^T] v = [r_bar; 0]`` in the
    least-squares sense; the system is consistent for ergodic ``P``.
    """
    P = as_matrix(P, "P")
    r = as_vector(r, "r")
    if r.shape[0] != P.shape[0]:
        raise DimensionMismatch(f"P is {P.shape}, r has length {r.size}")
    if phi is None:
        phi = stationary_distribution(P)
    rho, r_bar = average_reward(phi, r)
    n = P.shape[0]
    A = np.vstack([np.eye(n) - P, phi[None, :]])
    b = np.concatenate([r_bar, [0.0]])
    v, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < n:
        raise Singular(f"stacked Poisson system has rank {rank} < {n}")
    v = v - float(phi @ v)
    sol = ValueSolution(rho, r_bar, v, phi)
    res = sol.poisson_residual(P)
    if res > 1e-8:
        raise InvariantViolated(f"Poisson residual {res:.3e} > 1e-8")
    if sol.normalization() > 1e-10:
        raise InvariantViolated(f"|phi^T v| = {sol.normalization():.3e} > 1e-10")
    return sol


def solve_poisson_fundamental(P, r, phi=None) -> ValueSolution:
    """Poisson solve through ``(I - P + 1 phi^T) v = r_bar``.

    The matrix is invertible for ergodic ``P`` and maps the subspace
    ``phi^T x = 0`` onto itself, so no normalization row is needed.
    Independent of ``solve_poisson``; used to cross-check it.
    """
    P = as_matrix(P, "P")
    r = as_vector(r, "r")
    if phi is None:
        phi = stationary_distribution(P)
    rho, r_bar = average_reward(phi, r)
    n = P.shape[0]
    v = solve_linear(np.eye(n) - P + np.outer(np.ones(n), phi), r_bar)
    return ValueSolution(rho, r_bar, v, phi)
