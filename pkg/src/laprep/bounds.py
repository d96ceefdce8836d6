"""Phi-weighted projections, value-approximation errors, and the error bounds.

The total bound on ``||v - v_hat_k||_Phi`` is a truncation term
``||r_bar||_Phi / sqrt(lambda_2 lambda_{k+1})`` plus an estimation term
``||v||_Phi sqrt(2 eps / (lambda_{k+1} - lambda_k))``. The estimation term
is vacuous when the gap vanishes; that case is carried as ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGap, DimensionMismatch, InvariantViolated, NegativeEpsilon, NotOrthonormal, RankDeficient
from .numlin import as_matrix, as_vector, weighted_norm, weighted_opnorm

GAP_TOL = 1e-12
SLACK = 1e-9


@dataclass(frozen=True)
class BoundReport:
    k: int
    lambda2: float
    lambda_k: float
    lambda_k1: float
    epsilon: float
    err_exact_basis: float
    err_learned_basis: float
    projector_distance: float
    truncation_bound: float
    estimation_bound: float | None
    total_bound: float | None

    @property
    def vacuous(self) -> bool:
        """True when the eigen-gap at k is degenerate and the bound says nothing."""
        return self.total_bound is None


def phi_projector(X, phi) -> np.ndarray:
    """``X (X^T Phi X)^{-1} X^T Phi``."""
    X = as_matrix(X, "X")
    phi = as_vector(phi, "phi")
    if X.shape[0] != phi.shape[0]:
        raise DimensionMismatch(f"X {X.shape}, phi {phi.shape}")
    PX = phi[:, None] * X
    G = X.T @ PX
    G = 0.5 * (G + G.T)
    try:
        cf = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("X^T Phi X is not positive definite") from exc
    if np.min(np.diag(cf)) ** 2 <= 1e-12 * max(1.0, float(np.max(np.diag(G)))):
        raise RankDeficient("X is numerically rank deficient in the Phi geometry")
    return X @ np.linalg.solve(G, PX.T)


def approx_value(v, X, phi) -> np.ndarray:
    """Phi-weighted least-squares fit of v on the columns of X."""
    v = as_vector(v, "v")
    X = as_matrix(X, "X")
    phi = as_vector(phi, "phi")
    PX = phi[:, None] * X
    G = X.T @ PX
    G = 0.5 * (G + G.T)
    try:
        coef = np.linalg.solve(G, PX.T @ v)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("X^T Phi X is singular") from exc
    return X @ coef


def truncation_bound(r_bar, phi, lambda2: float, lambda_k1: float) -> float:
    if lambda2 <= 1e-9:
        raise DegenerateGap(f"lambda_2 = {lambda2:.3e}")
    if lambda_k1 <= 0:
        raise DegenerateGap(f"lambda_(k+1) = {lambda_k1:.3e}")
    return weighted_norm(r_bar, phi) * math.sqrt(1.0 / (lambda2 * lambda_k1))


def estimation_bound(v, phi, epsilon: float, lambda_k: float, lambda_k1: float) -> float | None:
    """Second term of the total bound; ``None`` when the gap is degenerate."""
    if epsilon < 0:
        raise NegativeEpsilon(f"epsilon = {epsilon!r}")
    gap = lambda_k1 - lambda_k
    if gap <= GAP_TOL:
        return None
    return weighted_norm(v, phi) * math.sqrt(2.0 * epsilon / gap)


def _check_phi_orthonormal(Psi: np.ndarray, phi: np.ndarray, name: str) -> None:
    err = float(np.linalg.norm(Psi.T @ (phi[:, None] * Psi) - np.eye(Psi.shape[1])))
    if err > 1e-8:
        raise NotOrthonormal(f"{name}: ||M^T Phi M - I||_F = {err:.3e}")


def projector_distance(Psi, Psi_hat, phi) -> float:
    """Phi-operator norm of the difference of the two Phi-projectors."""
    Psi = as_matrix(Psi, "Psi")
    Psi_hat = as_matrix(Psi_hat, "Psi_hat")
    phi = as_vector(phi, "phi")
    if Psi.shape != Psi_hat.shape:
        raise DimensionMismatch(f"Psi {Psi.shape}, Psi_hat {Psi_hat.shape}")
    _check_phi_orthonormal(Psi, phi, "Psi")
    _check_phi_orthonormal(Psi_hat, phi, "Psi_hat")
    return weighted_opnorm(phi_projector(Psi, phi) - phi_projector(Psi_hat, phi), phi)


def make_report(bundle, representation, value_solution, k: int) -> BoundReport:
    """Assemble every quantity of the bound for one (chain, k) and check it.

    Raises ``InvariantViolated`` if any proven inequality fails beyond 1e-9.
    """
    lam = bundle.lambdas
    phi = bundle.phi
    n = lam.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    v = value_solution.v
    lambda2 = float(lam[1]) if n > 1 else math.inf
    lambda_k = float(lam[k - 1])
    lambda_k1 = float(lam[k]) if k < n else math.inf
    Psi = bundle.basis(k)
    Psi_hat = representation.Psi_hat
    if Psi_hat.shape[1] != k:
        raise DimensionMismatch(f"representation has {Psi_hat.shape[1]} columns, k={k}")
    eps = float(representation.epsilon)
    err_exact = weighted_norm(v - approx_value(v, Psi, phi), phi)
    err_learned = weighted_norm(v - approx_value(v, Psi_hat, phi), phi)
    dist = projector_distance(Psi, Psi_hat, phi)
    if k == n:
        trunc = 0.0
    else:
        trunc = truncation_bound(value_solution.r_bar, phi, lambda2, lambda_k1)
    est = estimation_bound(v, phi, eps, lambda_k, lambda_k1) if k < n else 0.0
    total = None if est is None else trunc + est
    report = BoundReport(k, lambda2, lambda_k, lambda_k1, eps, err_exact, err_learned, dist, trunc, est, total)
    check_report(report, weighted_norm(v, phi))
    return report


def check_report(report: BoundReport, v_norm: float | None = None) -> None:
    if report.err_exact_basis > report.truncation_bound + SLACK:
        raise InvariantViolated(
            f"truncation: err_exact {report.err_exact_basis:.6e} > bound {report.truncation_bound:.6e}"
        )
    if report.total_bound is not None and report.err_learned_basis > report.total_bound + SLACK:
        raise InvariantViolated(
            f"total: err_learned {report.err_learned_basis:.6e} > bound {report.total_bound:.6e}"
        )
    gap = report.lambda_k1 - report.lambda_k
    if gap > GAP_TOL and math.isfinite(gap):
        lim = math.sqrt(2.0 * report.epsilon / gap)
        if report.projector_distance > lim + SLACK:
            raise InvariantViolated(f"projector distance {report.projector_distance:.6e} > {lim:.6e}")
    if v_norm is not None:
        lower = report.err_exact_basis - report.projector_distance * v_norm
        if report.err_learned_basis < lower - SLACK:
            raise InvariantViolated(f"triangle: err_learned {report.err_learned_basis:.6e} < {lower:.6e}")
