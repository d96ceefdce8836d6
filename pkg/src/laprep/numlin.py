"""Dense linear-algebra kernels.

Matrices and vectors are plain ``numpy.ndarray`` objects of dtype float64.
``as_matrix``/``as_vector`` do the shape and finiteness validation that the
rest of the package relies on.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NoConvergence, NotOrthonormal, NotSymmetric, Singular

PIVOT_TOL = 1e-13
SIGN_TOL = 1e-12


def as_matrix(a, name="matrix") -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(x, name="vector") -> np.ndarray:
    arr = np.array(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {a.shape}")


def fix_signs(q: np.ndarray) -> np.ndarray:
    """Flip columns so the first entry with magnitude above 1e-12 is positive."""
    q = q.copy()
    for j in range(q.shape[1]):
        col = q[:, j]
        idx = np.flatnonzero(np.abs(col) > SIGN_TOL)
        if idx.size and col[idx[0]] < 0:
            q[:, j] = -col
    return q


def jacobi_eig(a: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Returns unsorted eigenvalues and the accumulated rotation matrix.
    Cost is O(n^3) per sweep; intended for n up to a few hundred.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), v
    target = np.finfo(float).eps * scale
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= target:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def sym_eig(a, tol: float = 1e-10, method: str = "lapack") -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns ascending eigenvalues and orthonormal eigenvectors (as columns)
    with the first significant entry of every column made positive.
    ``method="jacobi"`` runs the pure cyclic-Jacobi path instead of LAPACK.
    """
    a = as_matrix(a, "A")
    _square(a, "A")
    if tol <= 0:
        raise ValueError("tol must be positive")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > tol:
        raise NotSymmetric(f"max |A - A^T| = {asym:.3e} exceeds {tol:.1e}")
    a = 0.5 * (a + a.T)
    if method == "lapack":
        lam, q = np.linalg.eigh(a)
    elif method == "jacobi":
        lam, q = jacobi_eig(a)
        order = np.argsort(lam, kind="stable")
        lam, q = lam[order], q[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    return lam, fix_signs(q)


def solve_linear(a, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting."""
    a = as_matrix(a, "A")
    _square(a, "A")
    b = as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"A is {a.shape}, b has length {b.shape[0]}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() < PIVOT_TOL:
        raise Singular(f"pivot {pivots.min():.3e} below {PIVOT_TOL:.0e}")
    return sla.lu_solve((lu, piv), b, check_finite=False)


def _check_phi(phi: np.ndarray, n: int) -> None:
    if phi.shape[0] != n:
        raise DimensionMismatch(f"phi has length {phi.shape[0]}, expected {n}")
    if np.any(phi <= 0):
        raise ValueError("phi must be entrywise positive")


def weighted_norm(x, phi) -> float:
    x = as_vector(x, "x")
    phi = as_vector(phi, "phi")
    _check_phi(phi, x.shape[0])
    return float(np.sqrt(np.sum(phi * x * x)))


def weighted_opnorm(a, phi) -> float:
    """Operator norm of ``A`` induced by the phi-weighted Euclidean norm."""
    a = as_matrix(a, "A")
    _square(a, "A")
    phi = as_vector(phi, "phi")
    _check_phi(phi, a.shape[0])
    s = np.sqrt(phi)
    b = s[:, None] * a / s[None, :]
    gram = b.T @ b
    lam, _ = sym_eig(0.5 * (gram + gram.T), tol=np.inf)
    return float(np.sqrt(max(lam[-1], 0.0)))


def orthonormality_error(x: np.ndarray) -> float:
    return float(np.linalg.norm(x.T @ x - np.eye(x.shape[1])))


def principal_angles(x, y) -> np.ndarray:
    """Principal angles between the column spans of X and Y, ascending."""
    x = as_matrix(x, "X")
    y = as_matrix(y, "Y")
    if x.shape != y.shape:
        raise DimensionMismatch(f"X is {x.shape}, Y is {y.shape}")
    for name, m in (("X", x), ("Y", y)):
        err = orthonormality_error(m)
        if err > 1e-8:
            raise NotOrthonormal(f"{name}: ||M^T M - I||_F = {err:.3e}")
    cos = np.clip(np.linalg.svd(x.T @ y, compute_uv=False), 0.0, 1.0)
    return np.arccos(cos)
