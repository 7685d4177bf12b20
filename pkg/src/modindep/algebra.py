"""Finite-dimensional C*-subalgebras of M_n and states on them.

An algebra is stored as an orthonormal *Hermitian* basis of its span, which
keeps every state evaluation on a basis element real.  States are carried by
an ambient Hermitian witness ``rho`` with ``phi(a) = tr(rho a)``; positivity
is checked on the algebra only, so the witness need not be PSD in M_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .config import TOL
from .errors import (
    NormNotAttainedPositively,
    NotHermitian,
    NotInAlgebra,
    NotNormalized,
    NotPositiveOnAlgebra,
    NotUnitVector,
    ShapeMismatch,
)
from .linalg import (
    as_matrix,
    combine,
    herm_eig,
    hermitian_defect,
    hermitian_orthonormal_span,
    operator_norm,
    orthonormal_span,
    psd_sqrt,
    random_unit_vector,
    span_coefficients,
    span_residual,
)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of ``shape``-matrices given by an orthonormal basis."""

    shape: tuple
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def residual(self, M) -> float:
        return span_residual(self.basis, M)

    def contains(self, M, tol: float = TOL.span) -> bool:
        M = as_matrix(M)
        return self.residual(M) <= tol * max(1.0, float(np.linalg.norm(M)))

    def projector(self) -> np.ndarray:
        Q = self.basis.reshape(self.dim, -1).T
        return Q @ Q.conj().T

    def distance(self, other: "Subspace") -> float:
        """Spectral-norm distance between orthogonal projectors (0 iff equal)."""
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")
        return float(np.linalg.norm(self.projector() - other.projector(), 2)) if self.basis.size or other.basis.size else 0.0


@dataclass(frozen=True, eq=False)
class StarSubalgebra:
    n: int
    basis: np.ndarray
    unit: np.ndarray | None = None
    label: str = ""

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.basis)

    def coefficients(self, M) -> np.ndarray:
        return span_coefficients(self.basis, M)

    def residual(self, M) -> float:
        return span_residual(self.basis, M)

    def contains(self, M, tol: float = TOL.span) -> bool:
        M = as_matrix(M)
        return self.residual(M) <= tol * max(1.0, float(np.linalg.norm(M)))

    def require(self, M, tol: float = 1e-8) -> np.ndarray:
        M = as_matrix(M)
        if M.shape != (self.n, self.n) or not self.contains(M, tol):
            raise NotInAlgebra(f"element not in algebra {self.label or ''} (residual {self.residual(M) if M.shape == (self.n, self.n) else 'shape'})")
        return M

    def element(self, coeffs) -> np.ndarray:
        return combine(self.basis, coeffs)

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> np.ndarray:
        c = rng.standard_normal(self.dim)
        if not hermitian:
            c = c + 1j * rng.standard_normal(self.dim)
        return self.element(c)

    def contains_identity(self, tol: float = TOL.span) -> bool:
        return self.contains(np.eye(self.n), tol)

    def is_full(self) -> bool:
        return self.dim == self.n * self.n

    def is_commutative(self, tol: float = TOL.span) -> bool:
        B = self.basis
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                if np.linalg.norm(B[i] @ B[j] - B[j] @ B[i]) > tol:
                    return False
        return True

    def support(self) -> np.ndarray:
        """Orthonormal columns spanning the range of the unit."""
        if self.unit is None:
            return np.zeros((self.n, 0), dtype=complex)
        w, V = herm_eig(self.unit, tol=1e-8)
        return V[:, w > 0.5]

    def closure_defect(self) -> float:
        """Largest residual of adjoints and pairwise products of basis elements."""
        worst = 0.0
        B = self.basis
        for i in range(self.dim):
            worst = max(worst, self.residual(B[i].conj().T))
            for j in range(self.dim):
                worst = max(worst, self.residual(B[i] @ B[j]))
        return worst


def _products(B: np.ndarray) -> list:
    out = []
    for i in range(B.shape[0]):
        # products with j < i are adjoints of the ones kept (Hermitian basis)
        out.extend(B[i] @ B[i:])
    return out


def _detect_unit(n: int, basis: np.ndarray, tol: float) -> np.ndarray | None:
    """The unit of a finite-dimensional C*-algebra is the projection onto the joint range."""
    if basis.shape[0] == 0:
        return None
    X = np.concatenate(list(basis), axis=1)
    U, s, _ = np.linalg.svd(X)
    rank = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    Q = U[:, :rank]
    e = Q @ Q.conj().T
    if span_residual(basis, e) > 1e-7:
        return None
    for b in basis:
        if np.linalg.norm(e @ b - b) > 1e-7 or np.linalg.norm(b @ e - b) > 1e-7:
            return None
    # snap to the span so that the unit is an exact algebra element
    return combine(basis, span_coefficients(basis, e))


def generated_subalgebra(generators: Sequence, adjoin_ambient_unit: bool = False, n: int | None = None,
                         tol: float = TOL.span, label: str = "") -> StarSubalgebra:
    """Smallest *-closed, product-closed span containing ``generators``."""
    gens = [as_matrix(g) for g in generators]
    if n is None:
        if not gens:
            raise ValueError("n is required when there are no generators")
        n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise ShapeMismatch(f"generator of shape {g.shape}, expected {(n, n)}")
    if adjoin_ambient_unit:
        gens.append(np.eye(n, dtype=complex))
    B = hermitian_orthonormal_span(gens, n, tol)
    while True:
        grown = hermitian_orthonormal_span(list(B) + _products(B), n, tol)
        if grown.shape[0] == B.shape[0]:
            break
        B = grown
    return StarSubalgebra(n=n, basis=B, unit=_detect_unit(n, B, tol), label=label)


def full_algebra(n: int, label: str = "") -> StarSubalgebra:
    mats = []
    for k in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[k, k] = 1.0
        mats.append(E)
    r = 1.0 / np.sqrt(2.0)
    for k in range(n):
        for l in range(k + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[k, l] = S[l, k] = r
            A = np.zeros((n, n), dtype=complex)
            A[k, l] = -1j * r
            A[l, k] = 1j * r
            mats.extend([S, A])
    basis = np.stack(mats) if mats else np.zeros((0, n, n), dtype=complex)
    return StarSubalgebra(n=n, basis=basis, unit=np.eye(n, dtype=complex), label=label or f"M{n}")


@dataclass(frozen=True, eq=False)
class StateFunctional:
    algebra: StarSubalgebra
    witness: np.ndarray
    norm_value: float = 1.0
    note: str = ""

    def __call__(self, a) -> complex:
        return complex(np.vdot(self.witness, as_matrix(a)))

    def real(self, a) -> float:
        return self(a).real

    def gram(self) -> np.ndarray:
        B = self.algebra.basis
        # Q[i, j] = phi(b_i^* b_j) with Hermitian basis elements
        X = np.einsum("ab,ibc->iac", self.witness, B)
        Q = np.einsum("iac,jca->ij", X, B)
        return 0.5 * (Q + Q.conj().T)

    def values(self) -> np.ndarray:
        """Real values on the algebra's Hermitian basis; determine the functional."""
        return np.array([self.real(b) for b in self.algebra.basis])

    def canonical_witness(self) -> np.ndarray:
        """The unique witness lying in the algebra's span."""
        return self.algebra.element(self.values())

    def restrict(self, algebra: StarSubalgebra) -> "StateFunctional":
        """Same witness viewed on another algebra (no positivity re-check, no rescaling)."""
        value = self.real(algebra.unit) if algebra.unit is not None else 0.0
        return StateFunctional(algebra, self.witness, value, self.note)


def make_state(algebra: StarSubalgebra, witness, normalize: bool = False, note: str = "") -> StateFunctional:
    rho = as_matrix(witness)
    if rho.shape != (algebra.n, algebra.n):
        raise ShapeMismatch(f"witness shape {rho.shape}, algebra ambient {algebra.n}")
    if hermitian_defect(rho) > 1e-8 * max(1.0, float(np.abs(rho).max())):
        raise NotHermitian("state witness is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    probe = StateFunctional(algebra, rho)
    if algebra.dim:
        q = np.linalg.eigvalsh(probe.gram())
        if q.min() < -TOL.positivity:
            raise NotPositiveOnAlgebra(f"Gram form has eigenvalue {q.min():.3e}")
    value = probe.real(algebra.unit) if algebra.unit is not None else 0.0
    if normalize:
        if value <= TOL.normalization:
            raise NotNormalized(f"phi(unit) = {value:.3e} cannot be normalized")
        return StateFunctional(algebra, rho / value, 1.0, note)
    if abs(value - 1.0) > TOL.normalization:
        raise NotNormalized(f"phi(unit) = {value!r}, expected 1")
    return StateFunctional(algebra, rho, value, note)


def vector_state(x, algebra: StarSubalgebra | None = None, note: str = "") -> StateFunctional:
    x = np.asarray(x, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(x) - 1.0) > TOL.unit_vector:
        raise NotUnitVector(f"||x|| = {np.linalg.norm(x)!r}")
    if algebra is None:
        algebra = full_algebra(x.size)
    rho = np.outer(x, x.conj())
    value = float(np.real(np.vdot(rho, algebra.unit))) if algebra.unit is not None else 0.0
    return StateFunctional(algebra, rho, value, note or "vector")


def left_kernel(phi: StateFunctional, cutoff: float = TOL.kernel_cutoff) -> Subspace:
    """Null space of the Gram form, as matrices: {x in A : phi(x* x) = 0}."""
    A = phi.algebra
    shape = (A.n, A.n)
    if A.dim == 0:
        return Subspace(shape, np.zeros((0, *shape), dtype=complex))
    w, V = herm_eig(phi.gram(), tol=1e-8)
    null = V[:, w < cutoff]
    if null.shape[1] == 0:
        return Subspace(shape, np.zeros((0, *shape), dtype=complex))
    mats = np.einsum("kj,kab->jab", null, A.basis)
    return Subspace(shape, orthonormal_span(list(mats), shape))


def is_definite_at(phi: StateFunctional, a, tol: float = 1e-10) -> bool:
    a = phi.algebra.require(a)
    return abs(phi(a)) ** 2 >= phi.real(a.conj().T @ a) - tol


def norming_state(a, algebra: StarSubalgebra, tol: float = 1e-9) -> StateFunctional:
    """Vector state attaining ``phi(a) = ||a||`` for Hermitian ``a`` in ``algebra``."""
    a = as_matrix(a)
    if hermitian_defect(a) > 1e-9 * max(1.0, float(np.abs(a).max())):
        raise NotHermitian("norming_state needs a Hermitian element")
    algebra.require(a)
    a = 0.5 * (a + a.conj().T)
    S = algebra.support()
    w, V = herm_eig(S.conj().T @ a @ S, tol=1e-8)
    if -w[0] > w[-1] + tol:
        raise NormNotAttainedPositively(f"||a|| = {-w[0]:.6g} is attained at the bottom of the spectrum")
    xi = S @ V[:, -1]
    return vector_state(xi / np.linalg.norm(xi), algebra, note="norming")


def check_state_inequalities(phi: StateFunctional, a, b) -> dict:
    """Slacks of Cauchy-Schwarz, Kadison, Choi and phi(h^2) <= ||h|| phi(|h|).

    Kadison and the last inequality are applied to the Hermitian part ``h`` of ``a``.
    """
    a = phi.algebra.require(a)
    b = phi.algebra.require(b)
    ad = a.conj().T
    h = 0.5 * (a + ad)
    phi_aa = phi.real(ad @ a)
    phi_bb = phi.real(b.conj().T @ b)
    habs = psd_sqrt(h @ h)
    return {
        "cauchy_schwarz": phi_aa * phi_bb - abs(phi(b.conj().T @ a)) ** 2,
        "kadison": phi.real(h @ h) - phi.real(h) ** 2,
        "choi": phi_aa - abs(phi(a)) ** 2,
        "abs_bound": operator_norm(h) * phi.real(habs) - phi.real(h @ h),
    }


@dataclass
class PureStateFamily:
    """Extreme states of an algebra; ``exact`` when the list is the complete set."""

    states: list
    kind: str
    exact: bool
    projections: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]


def minimal_projections(algebra: StarSubalgebra, seed: int = 0, tol: float = 1e-8) -> list | None:
    """Minimal projections of a commutative algebra, or ``None`` if it is not one.

    A generic Hermitian element separates the joint eigenspaces; its spectral
    projections that lie in the algebra are the minimal projections.
    """
    if algebra.dim == 0 or not algebra.is_commutative():
        return None
    rng = np.random.default_rng(seed)
    h = algebra.element(rng.uniform(1.0, 2.0, algebra.dim))
    w, V = herm_eig(h, tol=1e-8)
    groups = []
    start = 0
    for k in range(1, w.size + 1):
        if k == w.size or w[k] - w[k - 1] > 1e-7 * max(1.0, abs(w[k])):
            groups.append((start, k))
            start = k
    projections = []
    for lo, hi in groups:
        P = V[:, lo:hi] @ V[:, lo:hi].conj().T
        if algebra.contains(P, 1e-7) and (algebra.unit is None or np.linalg.norm(algebra.unit @ P - P) < 1e-7):
            projections.append(algebra.element(algebra.coefficients(P)))
    if len(projections) != algebra.dim:
        return None
    if algebra.unit is not None and np.linalg.norm(sum(projections) - algebra.unit) > 1e-7:
        return None
    # lexicographic on the diagonal, largest first, for a stable enumeration
    projections.sort(key=lambda P: tuple(-np.round(np.diag(P).real, 9)))
    return projections


def extreme_states(algebra: StarSubalgebra, budget: int = 8, seed: int = 42) -> PureStateFamily:
    """Pure states of ``algebra``: exact for commutative algebras, sampled otherwise."""
    projections = minimal_projections(algebra, seed)
    if projections is not None:
        states = [StateFunctional(algebra, P / np.trace(P).real, 1.0, f"point-evaluation[{k}]")
                  for k, P in enumerate(projections)]
        return PureStateFamily(states, "commutative-exact", True, projections)
    rng = np.random.default_rng(seed)
    n = algebra.n
    if algebra.is_full():
        states = [vector_state(np.eye(n)[k], algebra, note=f"basis-vector[{k}]") for k in range(n)]
        states += [vector_state(random_unit_vector(rng, n), algebra, note=f"sampled-vector[{k}]")
                   for k in range(budget)]
        return PureStateFamily(states, "full-matrix-sampled", False)
    S = algebra.support()
    states = []
    for k in range(budget):
        # the maximizer of phi(h) over the state space is the top eigenvector state of h
        h = algebra.random_element(rng, hermitian=True)
        w, V = herm_eig(S.conj().T @ h @ S, tol=1e-8)
        xi = S @ V[:, -1]
        states.append(vector_state(xi / np.linalg.norm(xi), algebra, note=f"heuristic-top-eigvec[{k}]"))
    return PureStateFamily(states, "heuristic", False)
