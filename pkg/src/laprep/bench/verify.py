"""Property suites behind ``laprep verify``.

Every check returns a ``PropertyResult`` whose ``margin`` is the worst-case
slack over all trials (positive means the property held with room to spare).
``Hooks`` lets tests swap in deliberately broken components to make sure the
checks actually bite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..bounds import approx_value, make_report, phi_projector
from ..chain import check_ergodic, solve_poisson, solve_poisson_fundamental, stationary_distribution
from ..errors import Degenerate, InvariantViolated
from ..gdo import (
    GdoConfig,
    Representation,
    gdo_grad,
    gdo_loss,
    gdo_residual,
    optimize_gdo,
    phi_orthonormalize,
    sampled_loss,
)
from ..gridworld import build_grid, carve_walls, to_chain
from ..numlin import principal_angles, sym_eig, weighted_norm, weighted_opnorm
from ..spectral import (
    build_laplacian,
    cheeger_constant,
    chung_laplacian,
    spectral_gap,
    spectrum,
    symmetrize,
)
from ..synthetic import random_connected_graph, random_ergodic_chain, random_orthonormal, random_psd_with_zero

SEED = 20240611


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name:<40s} margin={self.margin:+.3e} {self.detail}"


@dataclass
class Hooks:
    laplacian: Callable = build_laplacian
    residual: Callable = gdo_residual


@dataclass
class _Margin:
    worst: float = math.inf
    trials: int = 0

    def add(self, slack: float) -> None:
        self.trials += 1
        self.worst = min(self.worst, float(slack))

    def flag(self, ok: bool) -> None:
        self.trials += 1
        if not ok:
            self.worst = min(self.worst, -1.0)

    def result(self, name: str, detail: str = "") -> PropertyResult:
        detail = detail or f"{self.trials} trials"
        return PropertyResult(name, self.worst >= 0, self.worst, detail)


def _rng(tag: int) -> np.random.Generator:
    return np.random.default_rng([SEED, tag])


def _chain(n, rng):
    P = random_ergodic_chain(n, rng)
    return P, stationary_distribution(P)


# numlin ---------------------------------------------------------------------


def check_sym_eig(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(1)
    acc = _Margin()
    for n in range(2, 51, 4 if fast else 1):
        A = rng.standard_normal((n, n))
        A = A + A.T
        lam, Q = sym_eig(A)
        norm = np.linalg.norm(A)
        acc.add(1e-9 * norm - np.linalg.norm(A @ Q - Q * lam[None, :]))
        acc.add(1e-10 - np.linalg.norm(Q.T @ Q - np.eye(n)))
        acc.flag(np.all(np.diff(lam) >= 0))
    return acc.result("numlin.sym_eig_reconstruction")


def check_jacobi(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(2)
    acc = _Margin()
    for n in range(2, 13 if fast else 25, 3):
        A = rng.standard_normal((n, n))
        A = A + A.T
        lam_j, Q_j = sym_eig(A, method="jacobi")
        lam_l, _ = sym_eig(A)
        norm = np.linalg.norm(A)
        acc.add(1e-10 * norm - np.max(np.abs(lam_j - lam_l)))
        acc.add(1e-9 * norm - np.linalg.norm(A @ Q_j - Q_j * lam_j[None, :]))
    return acc.result("numlin.jacobi_matches_lapack")


def check_sin_theta(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(3)
    acc = _Margin()
    for _ in range(20 if fast else 100):
        n = int(rng.integers(3, 16))
        k = int(rng.integers(1, n))
        X = random_orthonormal(n, k, rng)
        Y = random_orthonormal(n, k, rng)
        theta = principal_angles(X, Y)
        lhs = np.linalg.norm(X @ X.T - Y @ Y.T) ** 2
        rhs = 2.0 * np.sum(np.sin(theta) ** 2)
        acc.add(1e-9 - abs(lhs - rhs))
    return acc.result("numlin.sin_theta_frobenius_identity")


def check_sym_inverse(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(4)
    acc = _Margin()
    for _ in range(20 if fast else 100):
        n = int(rng.integers(2, 12))
        S = rng.standard_normal((n, n))
        K = rng.standard_normal((n, n))
        A = S @ S.T + 0.1 * np.eye(n) + (K - K.T)
        sym = 0.5 * (A + A.T)
        Ainv = np.linalg.inv(A)
        diff = np.linalg.inv(sym) - 0.5 * (Ainv + Ainv.T)
        acc.add(sym_eig(0.5 * (diff + diff.T), tol=1e-8)[0][0] + 1e-10)
    return acc.result("numlin.sym_inverse_inequality")


def check_opnorm(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(5)
    acc = _Margin()
    for _ in range(10 if fast else 50):
        n = int(rng.integers(2, 20))
        A = rng.standard_normal((n, n))
        acc.add(1e-10 - abs(weighted_opnorm(A, np.full(n, 1.0 / n)) - np.linalg.norm(A, 2)))
    return acc.result("numlin.weighted_opnorm_uniform")


# gridworld ------------------------------------------------------------------


def check_grid_chains(fast=False, hooks=None) -> PropertyResult:
    acc = _Margin()
    walls = (0, 10, 50) if fast else (0, 1, 10, 25, 50)
    seeds = (0,) if fast else (0, 1, 2, 3, 4)
    base = build_grid(15, 15)
    for seed in seeds:
        prev = frozenset()
        for w in walls:
            env = carve_walls(base, w, seed)
            acc.flag(env.is_connected())
            acc.flag(prev <= env.removed_edges)
            acc.flag(carve_walls(base, w, seed).removed_edges == env.removed_edges)
            prev = env.removed_edges
            chain = to_chain(env)
            acc.add(1e-12 - np.max(np.abs(chain.P.sum(axis=1) - 1.0)))
            acc.flag(check_ergodic(chain.P))
    return acc.result("gridworld.connected_stochastic_nested")


# chain ----------------------------------------------------------------------


def check_poisson(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(6)
    acc = _Margin()
    for _ in range(10 if fast else 40):
        n = int(rng.integers(1, 31))
        P, _ = _chain(n, rng)
        r = rng.standard_normal(n)
        a = solve_poisson(P, r)
        b = solve_poisson_fundamental(P, r)
        acc.add(1e-8 - a.poisson_residual(P))
        acc.add(1e-10 - a.normalization())
        acc.add(1e-12 - abs(a.phi.sum() - 1.0))
        acc.add(1e-10 - np.max(np.abs(a.phi @ P - a.phi)))
        acc.add(1e-9 - np.max(np.abs(a.v - b.v)))
    return acc.result("chain.poisson_invariants_two_paths")


def _v_basis(phi: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {x : phi^T x = 0}."""
    q, _ = np.linalg.qr(np.column_stack([phi, np.eye(phi.size)[:, :-1]]))
    return q[:, 1:]


def check_bijectivity(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(7)
    acc = _Margin()
    for _ in range(10 if fast else 40):
        n = int(rng.integers(2, 31))
        P, phi = _chain(n, rng)
        B = _v_basis(phi)
        for M in (np.eye(n) - P, hooks.laplacian(P, phi)):
            smin = np.linalg.svd(M @ B, compute_uv=False).min() / max(np.linalg.norm(M, 2), 1e-300)
            acc.add(smin - 1e-10)
    return acc.result("chain.bijective_on_zero_mean_subspace")


# spectral -------------------------------------------------------------------


def check_self_adjoint(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(8)
    acc = _Margin()
    for _ in range(10 if fast else 50):
        n = int(rng.integers(2, 31))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        PL = phi[:, None] * L
        acc.add(1e-12 - np.linalg.norm(PL - PL.T))
        acc.add(1e-12 - np.max(np.abs(L @ np.ones(n))))
    return acc.result("spectral.phi_self_adjoint")


def check_psd_zero_mode(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(9)
    acc = _Margin()
    for _ in range(10 if fast else 50):
        n = int(rng.integers(2, 31))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        b = spectrum(L, phi)
        acc.add(b.lambdas[0] + 1e-9)
        acc.add(1e-9 - abs(b.lambdas[0]))
        acc.add(1e-8 - np.max(np.abs(b.U[:, 0] - 1.0)))
        acc.add(1e-8 - np.max(np.abs(L @ b.U - b.U * b.lambdas[None, :])))
        acc.add(1e-10 - np.linalg.norm(b.U.T @ (phi[:, None] * b.U) - np.eye(n)))
    # block-diagonal chains: one zero eigenvalue per component
    for comps in (2, 3):
        blocks = [random_ergodic_chain(int(rng.integers(2, 6)), rng) for _ in range(comps)]
        n = sum(bk.shape[0] for bk in blocks)
        P = np.zeros((n, n))
        weights = []
        at = 0
        for bk in blocks:
            size = bk.shape[0]
            P[at:at + size, at:at + size] = bk
            weights.append(stationary_distribution(bk) / comps)
            at += size
        phi = np.concatenate(weights)
        b = spectrum(hooks.laplacian(P, phi), phi)
        zeros = int(np.sum(b.lambdas < 1e-9))
        acc.flag(zeros == comps)
        try:
            spectral_gap(b)
            acc.flag(False)
        except Degenerate:
            acc.flag(True)
    return acc.result("spectral.psd_zero_mode_components")


def check_chung(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(10)
    acc = _Margin()
    for _ in range(10 if fast else 50):
        n = int(rng.integers(2, 31))
        P, phi = _chain(n, rng)
        lc = chung_laplacian(P, phi, check=False)
        acc.add(1e-12 - np.max(np.abs(lc - symmetrize(hooks.laplacian(P, phi), phi))))
        lam_c = np.linalg.eigvalsh(lc)
        lam_l = np.sort(np.linalg.eigvals(build_laplacian(P, phi)).real)
        acc.add(1e-9 - np.max(np.abs(lam_c - lam_l)))
    return acc.result("spectral.chung_similarity")


def normalized_lambda2(W: np.ndarray) -> float:
    """lambda_2 of I - D^{-1/2} W D^{-1/2}, via the walk P = D^{-1} W."""
    deg = W.sum(axis=1)
    P = W / deg[:, None]
    phi = deg / deg.sum()
    return float(spectrum(build_laplacian(P, phi), phi).lambdas[1])


def check_cheeger(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(11)
    acc = _Margin()
    for _ in range(15 if fast else 50):
        n = int(rng.integers(2, 13))
        W = random_connected_graph(n, rng)
        h = cheeger_constant(W)
        lam2 = normalized_lambda2(W)
        acc.add(lam2 - h * h / 2.0 + 1e-12)
        acc.add(2.0 * h - lam2 + 1e-12)
    return acc.result("spectral.cheeger_sandwich")


# gdo ------------------------------------------------------------------------


def check_courant_fischer(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(12)
    acc = _Margin()
    for _ in range(10 if fast else 50):
        n = int(rng.integers(3, 25))
        k = int(rng.integers(1, n))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        b = spectrum(L, phi)
        Psi = phi_orthonormalize(rng.standard_normal((n, k)), phi)
        eps = hooks.residual(Psi, L, phi, b.lambdas)
        acc.add(eps + 1e-9)
    return acc.result("gdo.residual_nonnegative")


def check_gradient(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(13)
    acc = _Margin()
    for _ in range(5 if fast else 20):
        n = int(rng.integers(3, 16))
        k = int(rng.integers(1, min(4, n - 1) + 1))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        beta = float(rng.uniform(0.5, 10.0))
        X = rng.standard_normal((n, k))
        g = gdo_grad(X, L, phi, beta)
        fd = np.zeros_like(X)
        h = 1e-5
        for i in range(n):
            for j in range(k):
                E = np.zeros_like(X)
                E[i, j] = h
                fd[i, j] = (gdo_loss(X + E, L, phi, beta) - gdo_loss(X - E, L, phi, beta)) / (2 * h)
        rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)
        acc.add(1e-6 - rel)
    return acc.result("gdo.gradient_matches_central_difference")


def check_monte_carlo(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(14)
    acc = _Margin()
    zs = []
    for _ in range(2 if fast else 5):
        P, phi = _chain(5, rng)
        L = hooks.laplacian(P, phi)
        X = rng.standard_normal((5, 3))
        exact = gdo_loss(X, L, phi, 2.0)
        est, se = sampled_loss(X, P, phi, 2.0, 100_000, rng)
        z = abs(est - exact) / se
        zs.append(z)
        acc.add(3.0 - z)
    return acc.result("gdo.closed_form_matches_sampling", f"max |z| = {max(zs):.2f}")


# bounds ---------------------------------------------------------------------


def check_truncation(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(15)
    acc = _Margin()
    for _ in range(10 if fast else 40):
        n = int(rng.integers(2, 26))
        P, phi = _chain(n, rng)
        sol = solve_poisson(P, rng.standard_normal(n), phi)
        b = spectrum(hooks.laplacian(P, phi), phi)
        rn2 = weighted_norm(sol.r_bar, phi) ** 2
        for k in range(1, n):
            err = weighted_norm(sol.v - approx_value(sol.v, b.basis(k), phi), phi) ** 2
            bound = rn2 / (b.lambdas[1] * b.lambdas[k])
            acc.add((bound - err) / max(abs(bound), 1e-12) + 1e-12)
    return acc.result("bounds.truncation_lemma_all_k")


def check_theorem(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(16)
    acc = _Margin()
    for _ in range(10 if fast else 40):
        n = int(rng.integers(3, 21))
        k = int(rng.integers(1, n))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        sol = solve_poisson(P, rng.standard_normal(n), phi)
        b = spectrum(L, phi)
        sigma = 10 ** rng.uniform(-4, 0)
        Psi_hat = phi_orthonormalize(b.basis(k) + sigma * rng.standard_normal((n, k)), phi)
        eps = hooks.residual(Psi_hat, L, phi, b.lambdas)
        try:
            rep = make_report(b, Representation(Psi_hat, k, eps), sol, k)
        except InvariantViolated:
            acc.add(-1.0)
            continue
        if rep.total_bound is not None:
            acc.add(rep.total_bound - rep.err_learned_basis)
    return acc.result("bounds.main_theorem")


def check_graph_drawing(fast=False, hooks=None) -> PropertyResult:
    """Projector distance vs sqrt(2 eps / gap) on synthetic PSD matrices."""
    rng = _rng(17)
    acc = _Margin()
    for _ in range(40 if fast else 200):
        n = int(rng.integers(6, 31))
        k = int(rng.integers(1, 6))
        A, lam, Q = random_psd_with_zero(n, rng)
        gap = lam[k] - lam[k - 1]
        if gap <= 1e-9:
            continue
        sigma = 10 ** rng.uniform(-4, 0.5)
        Psi = Q[:, :k]
        Psi_t = np.linalg.qr(Psi + sigma * rng.standard_normal((n, k)))[0]
        # Euclidean orthonormality is Phi-orthonormality of sqrt(n) Psi under uniform phi
        eps = hooks.residual(np.sqrt(n) * Psi_t, A, np.full(n, 1.0 / n), lam)
        dist = np.linalg.norm(Psi @ Psi.T - Psi_t @ Psi_t.T, 2)
        acc.add(math.sqrt(2.0 * eps / gap) - dist)
    return acc.result("bounds.graph_drawing_lemma")


def check_weighted_projector(fast=False, hooks=None) -> PropertyResult:
    """Phi-weighted projector distance vs sqrt(2 eps / gap) on perturbed chain bases."""
    rng = _rng(22)
    acc = _Margin()
    for _ in range(10 if fast else 40):
        n = int(rng.integers(3, 26))
        k = int(rng.integers(1, min(6, n)))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        b = spectrum(L, phi)
        gap = b.lambdas[k] - b.lambdas[k - 1]
        if gap <= 1e-9:
            continue
        sigma = 10 ** rng.uniform(-4, 0)
        Psi_hat = phi_orthonormalize(b.basis(k) + sigma * rng.standard_normal((n, k)), phi)
        eps = hooks.residual(Psi_hat, L, phi, b.lambdas)
        dist = weighted_opnorm(phi_projector(b.basis(k), phi) - phi_projector(Psi_hat, phi), phi)
        acc.add(math.sqrt(2.0 * eps / gap) + 1e-9 - dist)
    return acc.result("bounds.weighted_projector_lemma")


def check_quadratic_bound(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(18)
    acc = _Margin()
    for _ in range(20 if fast else 100):
        n = int(rng.integers(2, 25))
        A, lam, Q = random_psd_with_zero(n, rng)
        v = rng.standard_normal(n)
        for k in range(1, n):
            vk = Q[:, :k] @ (Q[:, :k].T @ v)
            lhs = np.sum((v - vk) ** 2)
            rhs = (v @ A @ v - vk @ A @ vk) / lam[k]
            acc.add(rhs - lhs + 1e-10 * max(1.0, rhs))
    return acc.result("bounds.quadratic_bound")


def check_phi_spd(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(19)
    acc = _Margin()
    for _ in range(5 if fast else 20):
        n = int(rng.integers(2, 31))
        P, phi = _chain(n, rng)
        M = phi[:, None] * hooks.laplacian(P, phi)
        B = _v_basis(phi)
        for _ in range(100):
            x = B @ rng.standard_normal(n - 1)
            acc.add(float(x @ M @ x) / float(x @ x))
    return acc.result("bounds.phi_spd_on_zero_mean_subspace")


def kernel_pairing(f, g, P, phi) -> float:
    """<f, L~ g> in the phi-weighted function space, from the kernel definition."""
    n = P.shape[0]
    total = 0.0
    for s in range(n):
        inner = 0.0
        for t in range(n):
            kernel = P[s, t] / (2.0 * phi[t]) + P[t, s] / (2.0 * phi[s])
            inner += kernel * g[t] * phi[t]
        total += phi[s] * f[s] * (g[s] - inner)
    return total


def check_kernel_equivalence(fast=False, hooks=None) -> PropertyResult:
    rng = _rng(20)
    acc = _Margin()
    for _ in range(5 if fast else 20):
        n = int(rng.integers(2, 16))
        P, phi = _chain(n, rng)
        L = hooks.laplacian(P, phi)
        for _ in range(20 if fast else 100):
            f = rng.standard_normal(n)
            g = rng.standard_normal(n)
            acc.add(1e-10 - abs(kernel_pairing(f, g, P, phi) - f @ (phi * (L @ g))))
            acc.add(1e-12 - abs(float(np.sum(f * g * phi)) - f @ (phi * g)))
    return acc.result("bounds.kernel_pairing_equivalence")


def check_gdo_recovers(fast=False, hooks=None) -> PropertyResult:
    """Full-gradient GDO on a small chain drives eps and the projector gap to ~0."""
    rng = _rng(21)
    acc = _Margin()
    for _ in range(2 if fast else 5):
        P, phi = _chain(8, rng)
        L = hooks.laplacian(P, phi)
        b = spectrum(L, phi)
        k = 3
        if b.lambdas[k] - b.lambdas[k - 1] < 1e-3:
            continue
        res = optimize_gdo(P, L, phi, GdoConfig(k=k, iterations=3000, seed=int(rng.integers(1000))))
        losses = [loss for _, loss in res.trace]
        acc.flag(all(b2 <= a + 1e-12 for a, b2 in zip(losses, losses[1:])))
        Psi_hat = phi_orthonormalize(res.X, phi)
        eps = hooks.residual(Psi_hat, L, phi, b.lambdas)
        dist = weighted_opnorm(phi_projector(b.basis(k), phi) - phi_projector(Psi_hat, phi), phi)
        acc.add(1e-6 - eps)
        acc.add(math.sqrt(2 * eps / (b.lambdas[k] - b.lambdas[k - 1])) - dist + 1e-9)
    return acc.result("gdo.recovers_bottom_eigenspace")


CHECKS = (
    check_sym_eig,
    check_jacobi,
    check_sin_theta,
    check_sym_inverse,
    check_opnorm,
    check_grid_chains,
    check_poisson,
    check_bijectivity,
    check_self_adjoint,
    check_psd_zero_mode,
    check_chung,
    check_cheeger,
    check_courant_fischer,
    check_gradient,
    check_monte_carlo,
    check_gdo_recovers,
    check_truncation,
    check_theorem,
    check_graph_drawing,
    check_weighted_projector,
    check_quadratic_bound,
    check_phi_spd,
    check_kernel_equivalence,
)


def run_checks(fast: bool = False, hooks: Hooks | None = None, checks=CHECKS) -> list[PropertyResult]:
    hooks = hooks or Hooks()
    results = []
    for check in checks:
        try:
            results.append(check(fast=fast, hooks=hooks))
        except Exception as exc:  # a crash is a failed property, reported like one
            name = check.__name__.removeprefix("check_")
            results.append(PropertyResult(name, False, -math.inf, f"{type(exc).__name__}: {exc}"))
    return results


def verify(fast: bool = False, hooks: Hooks | None = None, out=print) -> int:
    results = run_checks(fast, hooks)
    for res in results:
        out(res.line())
    failed = sum(not r.passed for r in results)
    out(f"{len(results) - failed}/{len(results)} properties passed")
    return 1 if failed else 0
