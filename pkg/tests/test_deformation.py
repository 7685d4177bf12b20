from __future__ import annotations

import numpy as np
import pytest

from modindep.algebra import full_algebra, generated_subalgebra, make_state
from modindep.deformation import (build_deformed, circ, deformed_subalgebra, q_norm, sharp,
                                  transport_state_to_algebra, transport_state_to_deformed)
from modindep.errors import AnchorNotInModule, AnchorNotUnit, MixedAlgebras
from modindep.linalg import random_unitary
from modindep.module import inner, self_module, ternary_closure


def column_module(rng, k, n, extra=1):
    """Ternary module with an isometry anchor: the anchor plus a few random directions."""
    z0 = random_unitary(rng, k)[:, :n]
    gens = [z0] + [rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n)) for _ in range(extra)]
    return ternary_closure(gens), z0


def test_identity_anchor_gives_ordinary_product():
    E = self_module(full_algebra(2))
    D = build_deformed(E, np.eye(2))
    rng = np.random.default_rng(0)
    x, y = E.random_element(rng), E.random_element(rng)
    assert np.allclose(circ(D.cls(x), D.cls(y)).rep, x @ y)
    assert np.allclose(sharp(D.cls(x)).rep, x.conj().T)


def test_column_space_over_c_deforms_to_c():
    E = ternary_closure([np.eye(3)[:, [k]] for k in range(3)])
    v = np.array([[0.6], [0.0], [0.8j]])
    D = build_deformed(E, v)
    assert D.image.dim == 1
    assert np.allclose(D.representative(np.eye(3)[:, [2]]), v.conj().T @ np.eye(3)[:, [2]])


def test_product_of_representatives_and_unit_law():
    rng = np.random.default_rng(1)
    E, z0 = column_module(rng, 4, 2)
    D = build_deformed(E, z0)
    x, y = E.random_element(rng), E.random_element(rng)
    assert np.allclose(circ(D.cls(x), D.cls(y)).rep, inner(z0, x) @ inner(z0, y))
    assert np.allclose(circ(D.unit(), D.cls(x)).rep, D.cls(x).rep)
    assert np.allclose(sharp(sharp(D.cls(x))).rep, D.cls(x).rep)


def test_class_orthogonal_to_anchor_is_zero():
    E = ternary_closure([np.eye(3)[:, [k]] for k in range(3)])
    D = build_deformed(E, np.eye(3)[:, [0]])
    assert q_norm(D.cls(np.eye(3)[:, [1]])) == pytest.approx(0.0)


def test_canonical_representative_has_no_defect():
    rng = np.random.default_rng(2)
    E, z0 = column_module(rng, 5, 2, extra=2)
    D = build_deformed(E, z0)
    for _ in range(10):
        assert D.canonical_defect(E.random_element(rng)) < 1e-12


def test_transport_in_algebra_case():
    E = self_module(full_algebra(2))
    D = build_deformed(E, np.eye(2))
    psi = make_state(D.carrier.inner_algebra, np.diag([0.25, 0.75]))
    hat = transport_state_to_deformed(psi, D)
    x = E.random_element(np.random.default_rng(3))
    assert hat(D.cls(x).rep) == pytest.approx(psi(x))


def test_anchor_errors():
    E = self_module(generated_subalgebra([np.diag([1.0, 0.0])]))
    with pytest.raises(AnchorNotUnit):
        build_deformed(E, np.diag([1.0, 0.0]))
    F = ternary_closure([np.eye(3)[:, [0]]])
    with pytest.raises(AnchorNotInModule):
        build_deformed(F, np.eye(3)[:, [1]])


def test_mixed_algebras_rejected():
    rng = np.random.default_rng(4)
    E, z0 = column_module(rng, 4, 2)
    D1, D2 = build_deformed(E, z0), build_deformed(E, z0)
    with pytest.raises(MixedAlgebras):
        circ(D1.unit(), D2.unit())


def test_deformed_subalgebra_of_submodule():
    E = self_module(full_algebra(3))
    D = build_deformed(E, np.eye(3))
    F = self_module(generated_subalgebra([np.diag([1.0, 1.0, 0.0])]))
    sub = deformed_subalgebra(D, F)
    assert sub.dim == 1
