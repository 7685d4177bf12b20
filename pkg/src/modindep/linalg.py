"""Dense complex matrix routines used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Hermitian
spectral work goes through :func:`herm_eig`, which fixes the eigenvector
phases so that downstream certificates are reproducible byte for byte.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .config import TOL
from .errors import NotHermitian, NotPSD, ShapeMismatch


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def adjoint(M) -> np.ndarray:
    return np.conj(as_matrix(M)).T


def hermitian_part(M) -> np.ndarray:
    A = as_matrix(M)
    return 0.5 * (A + A.conj().T)


def hermitian_defect(M) -> float:
    A = as_matrix(M)
    return float(np.linalg.norm(A - A.conj().T, 2)) if A.size else 0.0


def _require_hermitian(H, tol):
    A = as_matrix(H)
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if hermitian_defect(A) > tol * scale:
        raise NotHermitian(f"||H - H*|| = {hermitian_defect(A):.3e} exceeds {tol:.1e}")
    return 0.5 * (A + A.conj().T)


def normalize_phases(V: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    """Rotate each column so that its first non-negligible entry is real positive."""
    V = np.array(V, dtype=complex)
    for j in range(V.shape[1]):
        col = V[:, j]
        big = np.flatnonzero(np.abs(col) > cutoff * max(1.0, np.abs(col).max(initial=0.0)))
        if big.size:
            lead = col[big[0]]
            V[:, j] = col * (abs(lead) / lead)
    return V


def jacobi_eigh(H, tol: float = 1e-14, max_sweeps: int = 100) -> HermitianEig:
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each pivot ``(p, q)`` is handled by a diagonal phase that makes the
    entry real followed by a real plane rotation.
    """
    A = _require_hermitian(H, TOL.hermitian).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = (A[q, q].real - A[p, p].real) / (2.0 * r)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                U = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ U
                A[p, q] = A[q, p] = 0.0
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return HermitianEig(w[order], normalize_phases(V[:, order]))


def herm_eig(H, tol: float = TOL.hermitian, method: str = "lapack") -> HermitianEig:
    """Eigendecomposition with ascending eigenvalues and phase-normalized vectors."""
    A = _require_hermitian(H, tol)
    if method == "jacobi":
        return jacobi_eigh(A)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = np.linalg.eigh(A)
    return HermitianEig(w, normalize_phases(V))


def psd_sqrt(H) -> np.ndarray:
    w, V = herm_eig(H, tol=1e-8)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.size and w.min() < -TOL.psd_fail * scale:
        raise NotPSD(f"minimum eigenvalue {w.min():.3e} < -{TOL.psd_fail:.0e}")
    # roundoff dust would otherwise turn into spurious eigenvalues of size sqrt(dust)
    w = np.where(w < TOL.psd_clamp * scale, 0.0, w)
    root = np.sqrt(w)
    return (V * root) @ V.conj().T


def operator_norm(M) -> float:
    A = as_matrix(M)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[0])


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    shift = css[rho] / (rho + 1.0)
    return np.maximum(v - shift, 0.0)


def project_spectahedron(H) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite trace-one matrix."""
    w, V = herm_eig(H)
    p = project_simplex(w)
    return (V * p) @ V.conj().T


def trace_pair(A, B) -> complex:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {B.shape} differ")
    return complex(np.vdot(A, B))


def orthonormal_span(mats: Sequence[np.ndarray], shape=None, tol: float = TOL.span) -> np.ndarray:
    """Orthonormal basis (under the trace pairing) of the complex span of ``mats``.

    Returns an array of shape ``(d, rows, cols)``.
    """
    mats = [as_matrix(m) for m in mats]
    if shape is None:
        if not mats:
            raise ValueError("shape required for an empty generator list")
        shape = mats[0].shape
    if not mats:
        return np.zeros((0, *shape), dtype=complex)
    X = np.stack([m.reshape(-1) for m in mats], axis=1)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] <= tol:
        return np.zeros((0, *shape), dtype=complex)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    Q = normalize_phases(U[:, :rank])
    return Q.T.reshape(rank, *shape)


def hermitian_orthonormal_span(mats: Sequence[np.ndarray], n: int, tol: float = TOL.span) -> np.ndarray:
    """Orthonormal Hermitian basis of the *-closed complex span of ``mats``.

    Every element of a *-closed span is a complex combination of Hermitian
    elements, and a real-orthonormal Hermitian family is complex-orthonormal.
    """
    herm = []
    for m in mats:
        m = as_matrix(m)
        herm.append(0.5 * (m + m.conj().T))
        herm.append(0.5j * (m.conj().T - m))
    if not herm:
        return np.zeros((0, n, n), dtype=complex)
    X = np.stack([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in herm], axis=1)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] <= tol:
        return np.zeros((0, n, n), dtype=complex)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    Q = U[:, :rank]
    # sign convention: first non-negligible coordinate positive
    for j in range(rank):
        big = np.flatnonzero(np.abs(Q[:, j]) > 1e-12)
        if big.size and Q[big[0], j] < 0:
            Q[:, j] = -Q[:, j]
    re = Q[: n * n].T.reshape(rank, n, n)
    im = Q[n * n:].T.reshape(rank, n, n)
    B = re + 1j * im
    return 0.5 * (B + np.conj(np.transpose(B, (0, 2, 1))))


def span_coefficients(basis: np.ndarray, M) -> np.ndarray:
    """Coefficients of the orthogonal projection of ``M`` onto an orthonormal basis."""
    M = as_matrix(M)
    if basis.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    return np.einsum("kij,ij->k", basis.conj(), M)


def span_residual(basis: np.ndarray, M) -> float:
    """Frobenius distance from ``M`` to the span of an orthonormal basis."""
    M = as_matrix(M)
    if basis.shape[0] == 0:
        return float(np.linalg.norm(M))
    c = span_coefficients(basis, M)
    return float(np.linalg.norm(M - np.tensordot(c, basis, axes=1)))


def combine(basis: np.ndarray, coeffs) -> np.ndarray:
    if basis.shape[0] == 0:
        return np.zeros(basis.shape[1:], dtype=complex)
    return np.tensordot(np.asarray(coeffs, dtype=complex), basis, axes=1)


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(X)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def matrix_to_json(M) -> list:
    """Row-major nested lists with complex entries as ``[re, im]``."""
    A = as_matrix(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def matrix_from_json(data) -> np.ndarray:
    try:
        rows = [[complex(float(e[0]), float(e[1])) if isinstance(e, (list, tuple)) else complex(e) for e in row]
                for row in data]
    except (TypeError, ValueError, IndexError) as exc:
        raise ValueError(f"malformed matrix: {exc}") from exc
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix rows")
    return as_matrix(np.array(rows, dtype=complex))
