"""Laplacians of (possibly non-reversible) ergodic chains and their spectra."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetryTooLarge,
    Degenerate,
    Disconnected,
    InvariantViolated,
    NotStationary,
    NotSymmetric,
    TooLarge,
)
from .numlin import as_matrix, as_vector, sym_eig

STATIONARY_TOL = 1e-10
ZERO_EIG_TOL = 1e-9


@dataclass(frozen=True)
class SpectralBundle:
    lambdas: np.ndarray
    U: np.ndarray
    phi: np.ndarray

    @property
    def size(self) -> int:
        return self.lambdas.shape[0]

    def basis(self, k: int) -> np.ndarray:
        return self.U[:, :k]


def _check_stationary(P: np.ndarray, phi: np.ndarray) -> None:
    if np.any(phi <= 0):
        raise NotStationary("phi must be entrywise positive")
    dev = float(np.max(np.abs(phi @ P - phi)))
    if dev > STATIONARY_TOL:
        raise NotStationary(f"||phi^T P - phi^T||_inf = {dev:.3e}")


def adjoint(P: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Phi-adjoint (time reversal) ``Phi^{-1} P^T Phi``."""
    return P.T * phi[None, :] / phi[:, None]


def build_laplacian(P, phi) -> np.ndarray:
    """``L = I - (P + Phi^{-1} P^T Phi) / 2``, Phi-self-adjoint for any ergodic P."""
    P = as_matrix(P, "P")
    phi = as_vector(phi, "phi")
    _check_stationary(P, phi)
    n = P.shape[0]
    return np.eye(n) - 0.5 * (P + adjoint(P, phi))


def symmetrize(L, phi, tol: float = 1e-10) -> np.ndarray:
    """Symmetric similar form ``Phi^{1/2} L Phi^{-1/2}``."""
    L = as_matrix(L, "L")
    phi = as_vector(phi, "phi")
    s = np.sqrt(phi)
    sym = s[:, None] * L / s[None, :]
    asym = float(np.max(np.abs(sym - sym.T)))
    if asym > tol:
        raise AsymmetryTooLarge(f"asymmetry {asym:.3e}; phi inconsistent with L")
    return 0.5 * (sym + sym.T)


def spectrum(L, phi) -> SpectralBundle:
    """Full spectrum of L through its symmetric form; U is Phi-orthonormal."""
    phi = as_vector(phi, "phi")
    lam, Y = sym_eig(symmetrize(L, phi))
    U = Y / np.sqrt(phi)[:, None]
    # make the zero mode exactly the constant vector when it is simple
    if lam.size > 1 and lam[1] - lam[0] > ZERO_EIG_TOL:
        U[:, 0] = 1.0
    return SpectralBundle(lam, U, phi)


def spectral_gap(bundle: SpectralBundle) -> float:
    if bundle.size < 2:
        raise Degenerate("a single-state chain has no spectral gap")
    lam2 = float(bundle.lambdas[1])
    if lam2 < ZERO_EIG_TOL:
        raise Degenerate(f"lambda_2 = {lam2:.3e}: the transition graph is disconnected")
    return lam2


def chung_laplacian(P, phi, check: bool = True) -> np.ndarray:
    """Directed-graph Laplacian ``I - (Phi^{1/2} P Phi^{-1/2} + Phi^{-1/2} P^T Phi^{1/2}) / 2``."""
    P = as_matrix(P, "P")
    phi = as_vector(phi, "phi")
    _check_stationary(P, phi)
    s = np.sqrt(phi)
    half = s[:, None] * P / s[None, :]
    lc = np.eye(P.shape[0]) - 0.5 * (half + half.T)
    if check:
        other = symmetrize(build_laplacian(P, phi), phi)
        diff = float(np.max(np.abs(lc - other)))
        if diff > 1e-12:
            raise InvariantViolated(f"Chung Laplacian differs from symmetrized L by {diff:.3e}")
    return lc


def dirichlet_energy(x, W) -> float:
    """``sum_ij W_ij (x_i - x_j)^2``, which equals ``2 x^T (D - W) x``."""
    x = as_vector(x, "x")
    W = as_matrix(W, "W")
    if np.max(np.abs(W - W.T), initial=0.0) > 1e-12:
        raise NotSymmetric("W must be symmetric")
    if np.any(W < 0):
        raise ValueError("W must be nonnegative")
    diff = x[:, None] - x[None, :]
    energy = float(np.sum(W * diff * diff))
    quad = float(2.0 * x @ ((np.diag(W.sum(axis=1)) - W) @ x))
    if abs(energy - quad) > 1e-10 * max(1.0, abs(energy)):
        raise InvariantViolated(f"double sum {energy!r} != 2 x^T(D-W)x {quad!r}")
    return energy


def _connected(W: np.ndarray) -> bool:
    n = W.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for v in np.flatnonzero(W[u] > 0):
            if not seen[v]:
                seen[v] = True
                frontier.append(v)
    return bool(seen.all())


def cheeger_constant(W) -> float:
    """Exact Cheeger constant by enumerating all ``2^(n-1) - 1`` cuts (n <= 16)."""
    W = as_matrix(W, "W")
    n = W.shape[0]
    if n > 16:
        raise TooLarge(f"brute force limited to 16 nodes, got {n}")
    if n < 2:
        raise ValueError("need at least two nodes")
    if np.max(np.abs(W - W.T)) > 1e-12:
        raise NotSymmetric("W must be symmetric")
    if np.any(W < 0):
        raise ValueError("W must be nonnegative")
    if not _connected(W):
        raise Disconnected("graph is disconnected")
    deg = W.sum(axis=1)
    total = deg.sum()
    # node n-1 always sits on the complement side, so each cut is seen once
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=n - 1)))[1:]
    side = np.hstack([masks, np.zeros((masks.shape[0], 1))])
    vol = side @ deg
    inner = np.einsum("ci,ij,cj->c", side, W, side)
    cut = vol - inner
    ratio = cut / np.minimum(vol, total - vol)
    return float(ratio.min())
