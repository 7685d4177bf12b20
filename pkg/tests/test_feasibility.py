from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modindep.errors import BadProblem
from modindep.feasibility import Constraint, FeasibilityProblem, facial_reduction, solve_feasibility

from oracles import decide, random_problem

E11 = np.diag([1.0, 0.0])
E22 = np.diag([0.0, 1.0])


def test_contradictory_normalizations_are_exactly_infeasible():
    P = FeasibilityProblem(2)
    P.add(np.eye(2), 1.0)
    P.add(np.eye(2), 2.0)
    cert = solve_feasibility(P)
    assert cert.infeasible and cert.exact_contradiction
    assert cert.method == "affine-contradiction"


def test_corner_scalars_force_the_tracial_state():
    P = FeasibilityProblem(2)
    c1 = P.add_variable("c1", 0.5, 1.0)
    c2 = P.add_variable("c2", 0.5, 1.0)
    P.add(E11, 0.0, [(c1, 1.0)])
    P.add(E22, 0.0, [(c2, 1.0)])
    cert = solve_feasibility(P)
    assert cert.feasible
    assert np.linalg.norm(cert.witness - np.eye(2) / 2) < 1e-6
    assert cert.scales["c1"] == pytest.approx(0.5, abs=1e-8)
    assert cert.scales["c2"] == pytest.approx(0.5, abs=1e-8)


def test_no_constraints_returns_a_density():
    cert = solve_feasibility(FeasibilityProblem(3))
    assert cert.feasible
    assert abs(np.trace(cert.witness).real - 1) < 1e-10
    assert np.linalg.eigvalsh(cert.witness).min() > -1e-10


def test_bad_problems_rejected():
    with pytest.raises(BadProblem):
        FeasibilityProblem(2).add(np.array([[0, 1], [0, 0]]), 0.0)
    with pytest.raises(BadProblem):
        FeasibilityProblem(2).add(np.eye(3), 0.0)
    with pytest.raises(BadProblem):
        FeasibilityProblem(2, [Constraint(np.eye(2), 1.0, ((3, 1.0),))])
    P = FeasibilityProblem(2)
    P.add_variable("u", 1.0, 0.0)
    with pytest.raises(BadProblem):
        FeasibilityProblem(2, [], P.variables)


def test_facial_reduction_restricts_to_top_eigenspace():
    P = FeasibilityProblem(3)
    P.add(np.diag([1.0, 1.0, 0.0]), 1.0)  # rho must live on the first two coordinates
    V, gap = facial_reduction(P)
    assert gap is None and V.shape == (3, 2)
    cert = solve_feasibility(P)
    assert cert.feasible and cert.method.startswith("face-reduced")
    assert abs(cert.witness[2, 2]) < 1e-10


def test_target_outside_spectrum_is_spectral_contradiction():
    P = FeasibilityProblem(2)
    P.add(np.diag([1.0, -1.0]), 1.5)
    cert = solve_feasibility(P)
    assert cert.infeasible and cert.method == "spectral-contradiction"
    assert cert.gap == pytest.approx(0.5)


def test_certificate_json_is_plain_and_stable():
    P = FeasibilityProblem(2)
    P.add(E11, 0.25)
    a, b = solve_feasibility(P).to_json(), solve_feasibility(P).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["status"] == "Feasible" and a["seed"] == 42


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5), st.integers(1, 3))
def test_feasible_witnesses_satisfy_constraints(seed, n, k):
    """Targets taken from a known density must be reached, and the witness must check out."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho0 = X @ X.conj().T
    rho0 /= np.trace(rho0).real
    P = FeasibilityProblem(n)
    for _ in range(k):
        Y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        G = 0.5 * (Y + Y.conj().T)
        P.add(G, float(np.trace(rho0 @ G).real))
    cert = solve_feasibility(P)
    assert cert.feasible
    assert np.abs(P.residuals(cert.witness)).max() < 1e-8
    assert np.linalg.eigvalsh(cert.witness).min() > -1e-8


def test_agrees_with_brute_force_on_small_problems():
    rng = np.random.default_rng(11)
    for i in range(12):
        n = 2 if i % 2 == 0 else 3
        G, t = random_problem(rng, n, int(rng.integers(1, 4)))
        P = FeasibilityProblem(n)
        for g, tt in zip(G, t):
            P.add(g, tt)
        verdict, margin, _ = decide(G, t)
        cert = solve_feasibility(P)
        assert not (verdict == "feasible" and cert.infeasible)
        assert not (verdict == "infeasible" and cert.feasible)
