"""Random test instances: ergodic chains, connected graphs, PSD matrices."""

from __future__ import annotations

import numpy as np


def random_ergodic_chain(n: int, rng: np.random.Generator, density: float = 0.4) -> np.ndarray:
    """Non-reversible ergodic transition matrix.

    A directed cycle plus self-loops guarantees irreducibility and
    aperiodicity; remaining entries are kept with probability ``density``.
    """
    mask = rng.random((n, n)) < density
    idx = np.arange(n)
    mask[idx, idx] = True
    mask[idx, (idx + 1) % n] = True
    weights = rng.gamma(0.7, size=(n, n)) * mask
    weights[idx, (idx + 1) % n] += 0.05
    weights[idx, idx] += 0.05
    return weights / weights.sum(axis=1, keepdims=True)


def random_connected_graph(n: int, rng: np.random.Generator, p: float | None = None) -> np.ndarray:
    """Unit-weight adjacency matrix of a connected graph without self-loops."""
    if p is None:
        p = rng.uniform(0.1, 0.7)
    upper = np.triu(rng.random((n, n)) < p, 1)
    perm = rng.permutation(n)
    # random spanning path guarantees connectivity
    for a, b in zip(perm[:-1], perm[1:]):
        upper[min(a, b), max(a, b)] = True
    return (upper | upper.T).astype(np.float64)


def random_orthonormal(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return q * np.sign(np.diag(r))[None, :]


def random_psd_with_zero(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetric PSD matrix with a simple zero eigenvalue; returns (A, eigvals, eigvecs)."""
    lam = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 2.0, size=n - 1))])
    Q = random_orthonormal(n, n, rng)
    A = (Q * lam[None, :]) @ Q.T
    return 0.5 * (A + A.T), lam, Q
