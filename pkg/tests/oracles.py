"""Brute-force reference decisions for small density-matrix feasibility problems.

A problem is a list of Hermitian matrices G_j with targets t_j; the question
is whether some density matrix rho has tr(rho G_j) = t_j for every j.

* Feasible side: a sample density close to the affine set is corrected by the
  minimum-norm trace-free Hermitian shift that solves the equations exactly;
  if the corrected matrix is still positive semidefinite it is a feasible
  point, and its smallest eigenvalue is the margin.
* Infeasible side: for every density, sum_j y_j tr(rho G_j) lies below
  lambda_max(sum_j y_j G_j), so a unit vector y with y.t above that bound
  proves infeasibility; the largest excess over a sphere grid is the margin.

Samples come from a dense Bloch-ball grid for 2x2 problems and from 10^6
random densities for 3x3 problems.
"""

from __future__ import annotations

import functools
import math

import numpy as np

SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def hermitian_coords(n: int) -> np.ndarray:
    """Orthonormal real basis of n x n Hermitian matrices, shape (n*n, n, n)."""
    out = []
    for a in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[a, a] = 1.0
        out.append(E)
    for a in range(n):
        for b in range(a + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[a, b] = S[b, a] = 1 / math.sqrt(2)
            A = np.zeros((n, n), dtype=complex)
            A[a, b], A[b, a] = -1j / math.sqrt(2), 1j / math.sqrt(2)
            out += [S, A]
    return np.stack(out)


@functools.lru_cache(maxsize=None)
def bloch_grid(step: float = 0.02) -> np.ndarray:
    """2x2 densities (I + r.sigma)/2 for r on a cubic grid inside the unit ball."""
    axis = np.arange(-1.0, 1.0 + step / 2, step)
    r = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    r = r[np.einsum("ij,ij->i", r, r) <= 1.0]
    return 0.5 * (np.eye(2) + np.einsum("ik,kab->iab", r, SIGMA))


@functools.lru_cache(maxsize=None)
def density_bank(n: int = 3, count: int = 1_000_000, seed: int = 2024) -> np.ndarray:
    """Random densities X X* / tr from complex Gaussian X with mixed ranks, as real coordinates."""
    rng = np.random.default_rng(seed)
    coords = hermitian_coords(n)
    chunks = []
    for start in range(0, count, 100_000):
        size = min(100_000, count - start)
        X = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
        # shrink some columns so that nearly singular densities are also present
        X[:, :, -1] *= rng.uniform(0.0, 1.0, (size, 1)) ** 2
        R = X @ np.conj(np.transpose(X, (0, 2, 1)))
        R /= np.trace(R, axis1=1, axis2=2).real[:, None, None]
        chunks.append(np.einsum("kab,iab->ik", coords.conj(), R).real)
    return np.concatenate(chunks)


def _samples(n: int) -> np.ndarray:
    if n == 2:
        coords = hermitian_coords(2)
        return np.einsum("kab,iab->ik", coords.conj(), bloch_grid()).real
    if n == 3:
        return density_bank()
    raise ValueError("oracle covers 2x2 and 3x3 problems")


def _sphere(k: int, count: int = 20_000) -> np.ndarray:
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        a = np.linspace(0, 2 * np.pi, 3600, endpoint=False)
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    i = np.arange(count) + 0.5
    phi = np.arccos(1 - 2 * i / count)
    theta = np.pi * (1 + 5 ** 0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


def decide(matrices, targets, candidates: int = 300) -> tuple:
    """``("feasible" | "infeasible" | "undetermined", margin, witness-or-None)``."""
    G = np.stack([np.asarray(g, dtype=complex) for g in matrices])
    t = np.asarray(targets, dtype=float)
    n = G.shape[1]
    coords = hermitian_coords(n)

    # dual certificate over a sphere grid
    Y = _sphere(len(t))
    S = np.einsum("yk,kab->yab", Y, G)
    excess = Y @ t - np.linalg.eigvalsh(S)[:, -1]
    dual_margin = float(excess.max())
    if dual_margin > 0:
        return "infeasible", dual_margin, None

    # primal: correct the best samples onto the affine set
    A = np.einsum("jab,kab->jk", G.conj(), coords).real  # constraint rows in real coordinates
    trace_row = np.einsum("kaa->k", coords).real
    A_full = np.vstack([A, trace_row])
    pinv = np.linalg.pinv(A_full)
    X = _samples(n)
    res = X @ A.T - t
    order = np.argsort(np.einsum("ij,ij->i", res, res))[:candidates]
    best = (-math.inf, None)
    for i in order:
        shift = pinv @ np.concatenate([-res[i], [0.0]])
        x = X[i] + shift
        if np.linalg.norm(A_full @ x - np.concatenate([t, [1.0]])) > 1e-10:
            continue  # the equations are inconsistent for this sample
        rho = np.einsum("k,kab->ab", x, coords)
        lam = float(np.linalg.eigvalsh(rho)[0])
        if lam > best[0]:
            best = (lam, rho)
    if best[0] >= 0:
        return "feasible", best[0], best[1]
    return "undetermined", 0.0, None


def random_problem(rng: np.random.Generator, n: int, k: int) -> tuple:
    """k random Hermitian constraints with targets from a random density, sometimes perturbed."""
    G = []
    for _ in range(k):
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        G.append(0.5 * (X + X.conj().T))
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = X @ X.conj().T
    rho /= np.trace(rho).real
    t = np.array([np.trace(rho @ g).real for g in G])
    if rng.uniform() < 0.5:
        t = t + rng.choice([-1, 1], k) * rng.uniform(0.05, 1.5, k)
    return G, t
