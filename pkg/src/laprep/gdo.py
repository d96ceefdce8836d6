"""Tabular Graph Drawing Objective: loss, gradient, optimizer, orthonormalization.

Features are a matrix ``X`` of shape (|S|, k). The loss is

    E_{s~phi, s'~P(.|s)} sum_i (X_i(s) - X_i(s'))^2
        + beta * sum_ij (E_{s~phi}[X_i(s) X_j(s)] - delta_ij)^2

evaluated in closed form as ``2 tr(X^T Phi L X) + beta ||X^T Phi X - I||_F^2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, Diverged, InvariantViolated, NotOrthonormal, RankDeficient
from .numlin import as_matrix, as_vector, sym_eig

INIT_STREAM = 1
SAMPLE_STREAM = 2
RELOAD_EVERY = 200


@dataclass(frozen=True)
class GdoConfig:
    k: int
    beta: float = 5.0
    step_size: float = 0.05
    iterations: int = 20000
    seed: int = 0
    mode: str = "full"
    batch: int = 256

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.mode not in ("full", "stochastic"):
            raise ValueError(f"mode must be 'full' or 'stochastic', got {self.mode!r}")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


@dataclass
class GdoResult:
    X: np.ndarray
    trace: list = field(default_factory=list)


@dataclass(frozen=True)
class Representation:
    Psi_hat: np.ndarray
    k: int
    epsilon: float
    optimizer_trace: tuple = ()


def _energy_matrix(L: np.ndarray, phi: np.ndarray) -> np.ndarray:
    m = phi[:, None] * L
    return 0.5 * (m + m.T)


def gdo_loss(X, L, phi, beta: float) -> float:
    X = as_matrix(X, "X")
    L = as_matrix(L, "L")
    phi = as_vector(phi, "phi")
    if X.shape[0] != L.shape[0] or phi.shape[0] != L.shape[0]:
        raise DimensionMismatch(f"X {X.shape}, L {L.shape}, phi {phi.shape}")
    M = _energy_matrix(L, phi)
    G = X.T @ (phi[:, None] * X)
    dev = G - np.eye(X.shape[1])
    return float(2.0 * np.sum(X * (M @ X)) + beta * np.sum(dev * dev))


def gdo_grad(X, L, phi, beta: float) -> np.ndarray:
    """Euclidean gradient of ``gdo_loss`` with respect to X."""
    X = as_matrix(X, "X")
    L = as_matrix(L, "L")
    phi = as_vector(phi, "phi")
    if X.shape[0] != L.shape[0] or phi.shape[0] != L.shape[0]:
        raise DimensionMismatch(f"X {X.shape}, L {L.shape}, phi {phi.shape}")
    M = _energy_matrix(L, phi)
    PX = phi[:, None] * X
    G = X.T @ PX
    return 4.0 * (M @ X) + 4.0 * beta * PX @ (G - np.eye(X.shape[1]))


def sampled_loss(X, P, phi, beta: float, n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo estimate of the expectation form and its standard error.

    Each sample draws ``s ~ phi, s' ~ P(.|s)`` for the energy term and two
    independent states ``u, u' ~ phi`` for the orthogonality penalty.
    """
    X = as_matrix(X, "X")
    n = P.shape[0]
    k = X.shape[1]
    s = rng.choice(n, size=n_samples, p=phi)
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = 1.0
    s2 = (rng.random(n_samples)[:, None] > cdf[s]).sum(axis=1)
    u = rng.choice(n, size=n_samples, p=phi)
    u2 = rng.choice(n, size=n_samples, p=phi)
    diff = X[s] - X[s2]
    energy = np.sum(diff * diff, axis=1)
    eye = np.eye(k)
    outer_u = X[u][:, :, None] * X[u][:, None, :] - eye
    outer_u2 = X[u2][:, :, None] * X[u2][:, None, :] - eye
    penalty = np.sum(outer_u * outer_u2, axis=(1, 2))
    samples = energy + beta * penalty
    return float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(n_samples))


def _init(n: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, INIT_STREAM])
    return rng.standard_normal((n, k)) / np.sqrt(n)


def _full_gradient(X, L, phi, config: GdoConfig, trace: list) -> np.ndarray:
    """Preconditioned gradient descent with Armijo backtracking.

    The search direction is the gradient in the Phi inner product,
    ``Phi^{-1} grad = 4 (L X + beta X (G - I))``. Along ``X - t D`` the loss
    is a quartic in t whose coefficients need a single product ``L D``.
    """
    beta = config.beta
    k = X.shape[1]
    eye = np.eye(k)
    M = _energy_matrix(L, phi)
    LX = L @ X
    loss0 = None
    t0 = config.step_size
    for it in range(config.iterations + 1):
        if it % RELOAD_EVERY == 0:
            LX = L @ X
        PX = phi[:, None] * X
        G = X.T @ PX
        dev = G - eye
        energy = 2.0 * np.sum(X * (M @ X)) if it % RELOAD_EVERY == 0 else 2.0 * np.sum(PX * LX)
        loss = energy + beta * np.sum(dev * dev)
        if loss0 is None:
            loss0 = loss
        trace.append((it, float(loss)))
        if not np.isfinite(loss) or loss > 1e6 * max(loss0, 1e-300):
            raise Diverged(f"loss {loss:.3e} at iteration {it}")
        if it == config.iterations:
            break
        D = 4.0 * (LX + beta * X @ dev)
        PD = phi[:, None] * D
        slope = np.sum(PD * D)  # <grad, D> in the Euclidean pairing
        if slope <= 1e-300:
            trace.extend((j, float(loss)) for j in range(it + 1, config.iterations + 1))
            break
        LD = L @ D
        c1 = -2.0 * np.sum(PD * LX) - 2.0 * np.sum(PX * LD)
        c2 = 2.0 * np.sum(PD * LD)
        cross = X.T @ PD
        cross = cross + cross.T
        DD = D.T @ PD
        t = t0
        while True:
            Gt = dev - t * cross + t * t * DD
            trial = energy + t * c1 + t * t * c2 + beta * np.sum(Gt * Gt)
            if trial <= loss - 1e-4 * t * slope or t < 1e-16:
                break
            t *= 0.5
        X = X - t * D
        LX = LX - t * LD
    return X


def _stochastic(X, P, L, phi, config: GdoConfig, trace: list) -> np.ndarray:
    """Plain SGD on sampled transitions; row updates are divided by phi."""
    rng = np.random.default_rng([config.seed, SAMPLE_STREAM])
    n, k = X.shape
    eye = np.eye(k)
    beta = config.beta
    b = config.batch
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = 1.0
    loss0 = gdo_loss(X, L, phi, beta)
    trace.append((0, loss0))
    for it in range(1, config.iterations + 1):
        s = rng.choice(n, size=b, p=phi)
        s2 = (rng.random(b)[:, None] > cdf[s]).sum(axis=1)
        u = rng.choice(n, size=b, p=phi)
        u2 = rng.choice(n, size=b, p=phi)
        grad = np.zeros_like(X)
        diff = X[s] - X[s2]
        np.add.at(grad, s, 2.0 * diff / b)
        np.add.at(grad, s2, -2.0 * diff / b)
        G1 = X[u].T @ X[u] / b - eye
        G2 = X[u2].T @ X[u2] / b - eye
        np.add.at(grad, u, 2.0 * beta * X[u] @ G2 / b)
        np.add.at(grad, u2, 2.0 * beta * X[u2] @ G1 / b)
        X = X - config.step_size * grad / phi[:, None]
        loss = gdo_loss(X, L, phi, beta)
        trace.append((it, loss))
        if not np.isfinite(loss) or loss > 1e6 * max(loss0, 1e-300):
            raise Diverged(f"loss {loss:.3e} at iteration {it}")
    return X


def optimize_gdo(P, L, phi, config: GdoConfig) -> GdoResult:
    """Run the tabular GDO optimizer from a seeded Gaussian initialization."""
    P = as_matrix(P, "P")
    L = as_matrix(L, "L")
    phi = as_vector(phi, "phi")
    n = L.shape[0]
    if not config.k < n:
        raise ValueError(f"k={config.k} must be smaller than |S|={n}")
    X = _init(n, config.k, config.seed)
    trace: list = []
    if config.mode == "full":
        X = _full_gradient(X, L, phi, config, trace)
    else:
        X = _stochastic(X, P, L, phi, config, trace)
    return GdoResult(X, trace)


def phi_orthonormalize(X, phi) -> np.ndarray:
    """``X R^{-1}`` with ``R^T R = X^T Phi X`` (two Cholesky passes)."""
    X = as_matrix(X, "X")
    phi = as_vector(phi, "phi")
    if X.shape[0] != phi.shape[0]:
        raise DimensionMismatch(f"X {X.shape}, phi {phi.shape}")
    G = X.T @ (phi[:, None] * X)
    G = 0.5 * (G + G.T)
    lam_min = float(sym_eig(G)[0][0]) if G.size else 0.0
    if lam_min <= 1e-12:
        raise RankDeficient(f"smallest eigenvalue of X^T Phi X is {lam_min:.3e}")
    Q = X
    for _ in range(2):
        G = Q.T @ (phi[:, None] * Q)
        R = np.linalg.cholesky(0.5 * (G + G.T)).T
        Q = sla.solve_triangular(R, Q.T, trans="T", lower=False).T
    return Q


def phi_gram_error(Psi: np.ndarray, phi: np.ndarray) -> float:
    return float(np.linalg.norm(Psi.T @ (phi[:, None] * Psi) - np.eye(Psi.shape[1])))


def gdo_residual(Psi_hat, L, phi, lambdas) -> float:
    """``tr(Psi^T Phi L Psi) - sum_{i<=k} lambda_i``, nonnegative by Courant-Fischer."""
    Psi_hat = as_matrix(Psi_hat, "Psi_hat")
    L = as_matrix(L, "L")
    phi = as_vector(phi, "phi")
    lambdas = as_vector(lambdas, "lambdas")
    err = phi_gram_error(Psi_hat, phi)
    if err > 1e-8:
        raise NotOrthonormal(f"||Psi^T Phi Psi - I||_F = {err:.3e}")
    k = Psi_hat.shape[1]
    M = _energy_matrix(L, phi)
    eps = float(np.sum(Psi_hat * (M @ Psi_hat)) - np.sum(lambdas[:k]))
    if eps < -1e-9:
        raise InvariantViolated(f"residual {eps:.3e} below the Courant-Fischer minimum")
    return max(eps, 0.0)


def learn_representation(P, L, phi, lambdas, config: GdoConfig) -> Representation:
    result = optimize_gdo(P, L, phi, config)
    Psi_hat = phi_orthonormalize(result.X, phi)
    eps = gdo_residual(Psi_hat, L, phi, lambdas)
    return Representation(Psi_hat, config.k, eps, tuple(result.trace))


def write_trace(trace, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loss"])
        for it, loss in trace:
            writer.writerow([it, f"{loss:.12g}"])
