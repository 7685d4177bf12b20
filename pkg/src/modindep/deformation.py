"""The quotient C*-algebra [E] = E / {z0}^perp of a module with anchor <z0, z0> = 1.

Classes are materialized by their representatives ``r(x) = <z0, x>`` in M_n,
so that ``[x] o [y]`` is the matrix product of representatives, ``[x]#`` is
the adjoint and ``||[x]|| = ||<z0, x>||``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import StarSubalgebra, StateFunctional, generated_subalgebra, make_state
from .errors import AnchorNotInModule, AnchorNotUnit, DomainMismatch, ImageNotClosed, MixedAlgebras
from .linalg import as_matrix, hermitian_orthonormal_span, operator_norm, orthonormal_span
from .module import TernarySubspace, inner, verify_unit_inner


@dataclass(frozen=True, eq=False)
class DeformedAlgebra:
    anchor: np.ndarray
    carrier: TernarySubspace
    image: StarSubalgebra

    def representative(self, x) -> np.ndarray:
        return inner(self.anchor, x)

    def cls(self, x) -> "DeformedElement":
        """The class [x] of a module element."""
        x = as_matrix(x)
        if not self.carrier.contains(x, 1e-8):
            raise DomainMismatch("element is not in the carrier module")
        return DeformedElement(self, self.representative(x))

    def from_representative(self, r) -> "DeformedElement":
        r = as_matrix(r)
        if not self.image.contains(r, 1e-8):
            raise DomainMismatch("matrix is not a representative of this algebra")
        return DeformedElement(self, r)

    def unit(self) -> "DeformedElement":
        return self.cls(self.anchor)

    def canonical_defect(self, x) -> float:
        """||<z0, x - z0 <z0, x>>||, zero by construction."""
        x = as_matrix(x)
        z0 = self.anchor
        return operator_norm(inner(z0, x - z0 @ inner(z0, x)))

    def random_element(self, rng: np.random.Generator) -> "DeformedElement":
        return self.cls(self.carrier.random_element(rng))


@dataclass(frozen=True, eq=False)
class DeformedElement:
    algebra: DeformedAlgebra
    rep: np.ndarray

    def module_element(self) -> np.ndarray:
        """The canonical representative z0 <z0, x> of the class."""
        return self.algebra.anchor @ self.rep


def build_deformed(E: TernarySubspace, z0, tol: float = 1e-9) -> DeformedAlgebra:
    z0 = as_matrix(z0)
    if z0.shape != E.shape:
        raise AnchorNotInModule(f"anchor shape {z0.shape} vs module {E.shape}")
    if not verify_unit_inner(z0, tol=max(tol, 1e-9))["identity"]:
        raise AnchorNotUnit("<z0, z0> is not the identity")
    if not E.contains(z0, 1e-8):
        raise AnchorNotInModule("anchor does not lie in the module")
    reps = [inner(z0, b) for b in E.basis]
    n = E.cols
    basis = hermitian_orthonormal_span(reps, n)
    image = StarSubalgebra(n, basis, np.eye(n, dtype=complex), label=f"[{E.label}]" if E.label else "")
    # closure of the representative span under products and adjoints
    for i, a in enumerate(reps):
        if image.residual(a.conj().T) > 1e-8 * max(1.0, np.linalg.norm(a)):
            raise ImageNotClosed(f"adjoint of representative {i} leaves the image", pair=(i, i))
        for j, b in enumerate(reps):
            p = a @ b
            if image.residual(p) > 1e-8 * max(1.0, np.linalg.norm(p)):
                raise ImageNotClosed(f"product of representatives {i}, {j} leaves the image", pair=(i, j))
    # a *-closed complex span has as many Hermitian directions as complex ones
    if reps and basis.shape[0] != orthonormal_span(reps, (n, n)).shape[0]:
        raise ImageNotClosed("representative span is not *-closed")
    return DeformedAlgebra(z0, E, image)


def _same(a: DeformedElement, b: DeformedElement):
    if a.algebra is not b.algebra:
        raise MixedAlgebras("elements belong to different deformed algebras")


def circ(a: DeformedElement, b: DeformedElement) -> DeformedElement:
    _same(a, b)
    return DeformedElement(a.algebra, a.rep @ b.rep)


def sharp(a: DeformedElement) -> DeformedElement:
    return DeformedElement(a.algebra, a.rep.conj().T)


def q_norm(a: DeformedElement) -> float:
    return operator_norm(a.rep)


def transport_state_to_algebra(phi: StateFunctional, D: DeformedAlgebra) -> StateFunctional:
    """phi on [F]  ->  phi~ on <F, F>, phi~(a) = phi([z0 a])."""
    if phi.algebra is not D.image:
        raise DomainMismatch("state is not defined on this deformed algebra")
    target = D.carrier.inner_algebra
    z0 = D.anchor
    values = [phi.real(D.cls(z0 @ b).rep) for b in target.basis]
    return make_state(target, target.element(values), note="transported-to-algebra")


def transport_state_to_deformed(psi: StateFunctional, D: DeformedAlgebra) -> StateFunctional:
    """psi on <F, F>  ->  psi^ on [F], psi^([x]) = psi(<z0, x>)."""
    if psi.algebra is not D.carrier.inner_algebra:
        raise DomainMismatch("state is not defined on the inner algebra of this carrier")
    z0 = D.anchor
    # representatives are Hermitian basis elements r; the class is [z0 r]
    values = [psi.real(inner(z0, z0 @ r)) for r in D.image.basis]
    return make_state(D.image, D.image.element(values), note="transported-to-deformed")


def deformed_subalgebra(D: DeformedAlgebra, F: TernarySubspace) -> StarSubalgebra:
    """[F] for a ternary F inside the carrier, as a subalgebra of the image."""
    reps = [D.representative(b) for b in F.basis]
    return generated_subalgebra(reps, n=D.image.n, label=f"[{F.label}]" if F.label else "")
