"""Concrete Hilbert C*-modules: subspaces of k x n matrices with <x, y> = x* y.

The column carrier (n = 1) is a Hilbert space over C.  The vector module of
B(H), with <x, y>' = x (tensor) y and action x.T = T*(x), is the row carrier
(k = 1): a Hilbert vector h corresponds to the row ``h*``, so that
``<h1*, h2*> = h1 h2*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import StarSubalgebra, Subspace, generated_subalgebra
from .config import TOL
from .errors import ShapeMismatch
from .linalg import as_matrix, combine, operator_norm, orthonormal_span, psd_sqrt, span_residual


def inner(x, y) -> np.ndarray:
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape != y.shape:
        raise ShapeMismatch(f"{x.shape} vs {y.shape}")
    return x.conj().T @ y


def abs_of(x) -> np.ndarray:
    return psd_sqrt(inner(x, x))


def module_norm(x) -> float:
    return float(np.sqrt(operator_norm(inner(x, x))))


@dataclass(frozen=True, eq=False)
class TernarySubspace:
    rows: int
    cols: int
    basis: np.ndarray
    inner_algebra: StarSubalgebra
    label: str = ""

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def as_subspace(self) -> Subspace:
        return Subspace(self.shape, self.basis)

    def residual(self, x) -> float:
        return span_residual(self.basis, x)

    def contains(self, x, tol: float = TOL.span) -> bool:
        x = as_matrix(x)
        return x.shape == self.shape and self.residual(x) <= tol * max(1.0, float(np.linalg.norm(x)))

    def element(self, coeffs) -> np.ndarray:
        return combine(self.basis, coeffs)

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        return self.element(rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim))

    def ternary_defect(self) -> float:
        """Largest residual of x <y, z> over basis triples."""
        if self.dim == 0:
            return 0.0
        P = _ternary_products(self.basis)
        flat = P.reshape(P.shape[0], -1)
        Q = self.basis.reshape(self.dim, -1)
        coeffs = flat @ Q.conj().T
        return float(np.linalg.norm(flat - coeffs @ Q, axis=1).max())

    def is_self_module(self) -> bool:
        """True when the subspace equals its own inner algebra (a C*-subalgebra as self-module)."""
        if self.rows != self.cols or self.dim != self.inner_algebra.dim:
            return False
        return all(self.inner_algebra.contains(b, 1e-8) for b in self.basis)

    def probes(self, rng: np.random.Generator, n_random: int = 100, normalize: bool = True) -> list:
        """Basis elements, pairwise sums and differences, and seeded random elements."""
        out = list(self.basis)
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                out += [self.basis[i] + self.basis[j], self.basis[i] - self.basis[j]]
        out += [self.random_element(rng) for _ in range(n_random if self.dim else 0)]
        if normalize:
            out = [x / module_norm(x) for x in out if module_norm(x) > 1e-12]
        return out


def _ternary_products(B: np.ndarray) -> np.ndarray:
    G = np.matmul(B.conj().transpose(0, 2, 1)[:, None], B[None])  # <b_j, b_l>
    return np.matmul(B[:, None, None], G[None]).reshape(-1, *B.shape[1:])


def ternary_closure(generators: Sequence, shape=None, tol: float = TOL.span, label: str = "") -> TernarySubspace:
    """Smallest subspace F containing ``generators`` with F<F, F> contained in F."""
    gens = [as_matrix(g) for g in generators]
    if shape is None:
        if not gens:
            raise ValueError("shape required without generators")
        shape = gens[0].shape
    for g in gens:
        if g.shape != tuple(shape):
            raise ShapeMismatch(f"generator shape {g.shape}, expected {tuple(shape)}")
    B = orthonormal_span(gens, shape, tol)
    while B.shape[0]:
        grown = orthonormal_span(list(B) + list(_ternary_products(B)), shape, tol)
        if grown.shape[0] == B.shape[0]:
            break
        B = grown
    return _with_inner_algebra(B, shape, label)


def _with_inner_algebra(B: np.ndarray, shape, label: str = "") -> TernarySubspace:
    k, n = shape
    gram = [b1.conj().T @ b2 for b1 in B for b2 in B]
    algebra = generated_subalgebra(gram, n=n, label=f"<{label},{label}>" if label else "")
    return TernarySubspace(k, n, B, algebra, label)


def subspace_intersection(F1, F2, tol: float = 1e-9) -> np.ndarray:
    Q1 = F1.basis.reshape(F1.basis.shape[0], -1).T
    Q2 = F2.basis.reshape(F2.basis.shape[0], -1).T
    shape = F1.basis.shape[1:]
    if Q1.shape[1] == 0 or Q2.shape[1] == 0:
        return np.zeros((0, *shape), dtype=complex)
    U, s, _ = np.linalg.svd(Q1.conj().T @ Q2)
    keep = U[:, s > 1.0 - tol]
    vecs = Q1 @ keep
    return orthonormal_span([v.reshape(shape) for v in vecs.T], shape)


def intersect(F1: TernarySubspace, F2: TernarySubspace, tol: float = TOL.span):
    """Intersection; a :class:`TernarySubspace` when it is ternary, else a :class:`Subspace`."""
    if F1.shape != F2.shape:
        raise ShapeMismatch(f"{F1.shape} vs {F2.shape}")
    B = subspace_intersection(F1, F2)
    if B.shape[0] in (F1.dim, F2.dim):
        # the intersection is one of the (ternary) operands
        return F1 if B.shape[0] == F1.dim else F2
    closed = ternary_closure(list(B), F1.shape, tol) if B.shape[0] else None
    if B.shape[0] == 0 or closed.dim == B.shape[0]:
        return _with_inner_algebra(B, F1.shape, "")
    return Subspace(F1.shape, B)


def intersection_scalar_check(F1: TernarySubspace, F2: TernarySubspace) -> dict:
    """Necessary-condition screen: <F1 n F2, F1 n F2> must be C|z| with ||z|| = 1."""
    meet = intersect(F1, F2)
    report = {"intersection_dim": meet.dim, "ternary": isinstance(meet, TernarySubspace),
              "inner_dim": None, "z": None, "witness_pair": None}
    if not isinstance(meet, TernarySubspace):
        report["screen"] = "inapplicable"
        return report
    report["inner_dim"] = meet.inner_algebra.dim
    if meet.dim == 0:
        report["screen"] = "trivial"
        return report
    if meet.inner_algebra.dim == 1:
        x = meet.basis[0]
        report["z"] = x / module_norm(x)
        report["screen"] = "pass"
        return report
    report["screen"] = "fail"
    report["witness_pair"] = _distinct_abs_pair(meet)
    return report


def _distinct_abs_pair(F: TernarySubspace):
    """Two norm-one elements with different |.|, which exist once dim <F, F> >= 2."""
    cands = list(F.basis)
    for i in range(F.dim):
        for j in range(i + 1, F.dim):
            cands += [F.basis[i] + F.basis[j], F.basis[i] + 1j * F.basis[j]]
    cands = [x / module_norm(x) for x in cands]
    ref = abs_of(cands[0])
    for x in cands[1:]:
        if np.linalg.norm(abs_of(x) - ref) > 1e-6:
            return (cands[0], x)
    return None


def verify_unit_inner(z, algebra: StarSubalgebra | None = None, tol: float = 1e-9) -> dict:
    """(a) <z, z> is the identity; (b) |z| (and |z|^2) act as the unit of ``algebra``."""
    z = as_matrix(z)
    zz = inner(z, z)
    n = zz.shape[0]
    report = {"identity": bool(np.linalg.norm(zz - np.eye(n), 2) <= tol),
              "acts_as_unit": None, "square_acts_as_unit": None}
    if algebra is not None:
        az = abs_of(z)
        az2 = zz
        report["acts_as_unit"] = bool(all(np.linalg.norm(az @ b - b) <= 1e-8 * max(1.0, np.linalg.norm(b))
                                          for b in algebra.basis))
        report["square_acts_as_unit"] = bool(all(np.linalg.norm(az2 @ b - b) <= 1e-8 * max(1.0, np.linalg.norm(b))
                                                 for b in algebra.basis))
    return report


def self_module(algebra: StarSubalgebra, label: str = "") -> TernarySubspace:
    """A C*-subalgebra regarded as a ternary subspace of the algebra-as-module."""
    n = algebra.n
    B = orthonormal_span(list(algebra.basis), (n, n)) if algebra.dim else np.zeros((0, n, n), dtype=complex)
    return TernarySubspace(n, n, B, algebra, label or algebra.label)
