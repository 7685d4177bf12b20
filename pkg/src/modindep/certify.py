"""Certification and refutation of C*-independence and module independence.

Two routes feed every verdict.  The sufficient route asks, for each pair of
pure states, for an ambient state whose restrictions are scalar multiples
(scale at least ``m``) of the given states; a solution yields the window
inequality m psi(|x|) <= phi(|x|) <= psi(|x|^2)^(1/2) for every x through

    m psi(|x|) <= c psi(|x|) = phi(|x|) <= psi(|x|) <= psi(|x|^2)^(1/2).

The refutation route shows that no ambient state can satisfy the window
inequalities for some state pair, either through scalar restrictions (for
C*-subalgebras regarded as self-modules) or through a finite relaxation on a
probe set (any module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (StarSubalgebra, StateFunctional, Subspace, extreme_states, left_kernel,
                      minimal_projections, norming_state)
from .config import RunConfig
from .deformation import build_deformed
from .errors import AmbientNotFull, AnchorNotShared, AnchorNotUnit, DivisionByZero, NotTernary
from .feasibility import FeasibilityCertificate, FeasibilityProblem, solve_feasibility
from .linalg import as_matrix, herm_eig, matrix_to_json, operator_norm, random_unit_vector
from .module import (TernarySubspace, abs_of, intersect, intersection_scalar_check, module_norm,
                     verify_unit_inner)

VERDICT_VERSION = 1
# smallest scale used when a refutation is re-checked over all windows
M_FLOOR = 1e-6


@dataclass(eq=False)
class IndependenceVerdict:
    kind: str  # CStarIndependent | ModuleIndependent | NotIndependent | Inconclusive
    window: tuple | None = None
    evidence: list = field(default_factory=list)
    methods: list = field(default_factory=list)
    witness: dict | None = None
    exact: bool = False
    cstar: bool = False
    notes: list = field(default_factory=list)
    observed_upper: float | None = None

    def to_json(self) -> dict:
        return {
            "version": VERDICT_VERSION,
            "kind": self.kind,
            "window": None if self.window is None else [float(v) for v in self.window],
            "observed_upper": None if self.observed_upper is None else float(self.observed_upper),
            "exact": bool(self.exact),
            "cstar": bool(self.cstar),
            "methods": list(self.methods),
            "witness": _jsonable(self.witness),
            "evidence": [_jsonable(e) for e in self.evidence],
            "notes": list(self.notes),
        }


def _jsonable(obj):
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _jsonable(obj.item())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, FeasibilityCertificate):
        return obj.to_json()
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj)
        if obj.ndim == 1 and np.iscomplexobj(obj):
            return [[float(z.real), float(z.imag)] for z in obj]
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return str(obj)


def _problem(n: int, config: RunConfig | None) -> FeasibilityProblem:
    config = config or RunConfig()
    return FeasibilityProblem(n, tol=config.tol, max_iter=config.max_iter, seed=config.seed)


def _add_state_constraints(problem, algebra: StarSubalgebra, state: StateFunctional, scale: int | None, tag: str):
    for k, b in enumerate(algebra.basis):
        value = state.real(b)
        if scale is None:
            problem.add(b, value, label=f"{tag}[{k}]")
        else:
            problem.add(b, 0.0, [(scale, value)], label=f"{tag}[{k}]")


def cstar_extension_check(A1: StarSubalgebra, phi1: StateFunctional, A2: StarSubalgebra, phi2: StateFunctional,
                          config: RunConfig | None = None) -> FeasibilityCertificate:
    """Is there an ambient state extending both phi1 and phi2?"""
    problem = _problem(A1.n, config)
    _add_state_constraints(problem, A1, phi1, None, "A1")
    _add_state_constraints(problem, A2, phi2, None, "A2")
    cert = solve_feasibility(problem)
    cert.method = "common-extension" if not cert.exact_contradiction else cert.method
    if cert.feasible:
        cert.scales = {"c1": 1.0, "c2": 1.0}
    return cert


def scalar_restriction_problem(A1: StarSubalgebra, phi1: StateFunctional, A2: StarSubalgebra,
                               phi2: StateFunctional, m: float, config: RunConfig | None = None) -> FeasibilityProblem:
    """phi(b) = c_i phi_i(b) on a basis of each A_i, scales c_i in [m, 1]."""
    if not 0.0 < m <= 1.0:
        raise ValueError(f"m must lie in (0, 1], got {m}")
    problem = _problem(A1.n, config)
    c1 = problem.add_variable("c1", m, 1.0)
    c2 = problem.add_variable("c2", m, 1.0)
    _add_state_constraints(problem, A1, phi1, c1, "A1")
    _add_state_constraints(problem, A2, phi2, c2, "A2")
    return problem


def scalar_restriction_check(A1: StarSubalgebra, phi1: StateFunctional, A2: StarSubalgebra, phi2: StateFunctional,
                             m: float, config: RunConfig | None = None) -> FeasibilityCertificate:
    """Is there an ambient state restricting to c_i phi_i on A_i with c_i in [m, 1]?"""
    cert = solve_feasibility(scalar_restriction_problem(A1, phi1, A2, phi2, m, config))
    if not cert.exact_contradiction:
        cert.method = "scalar-restriction"
    return cert


def kernel_match_check(A1: StarSubalgebra, phi1: StateFunctional, A2: StarSubalgebra, phi2: StateFunctional,
                       m: float, candidates, tol: float = 1e-6) -> dict:
    """Compare left kernels of each witness restricted to A_i with those of phi_i."""
    targets = [left_kernel(phi1), left_kernel(phi2)]
    rows = []
    for idx, cert in enumerate(candidates):
        if cert.witness is None:
            continue
        row = {"index": idx, "distances": [], "unit_values": [], "match": True}
        for A, target in zip((A1, A2), targets):
            restricted = StateFunctional(A, cert.witness)
            mine = left_kernel(restricted)
            d = mine.distance(target)
            value = restricted.real(A.unit) if A.unit is not None else 0.0
            row["distances"].append(d)
            row["unit_values"].append(value)
            row["match"] = row["match"] and d <= tol and value >= m - 1e-8
        rows.append(row)
    return {"checked": len(rows), "matches": sum(r["match"] for r in rows), "rows": rows}


def window_slacks(E: TernarySubspace, psi: StateFunctional, rho, m: float, M: float, probes) -> dict:
    """Slacks of m psi(|x|) <= phi(|x|) <= M psi(|x|^2)^(1/2) over probe elements x of E."""
    rho = as_matrix(rho)
    lower, upper, ratios = [], [], []
    for x in probes:
        ax = abs_of(x)
        px = psi.real(ax)
        fx = float(np.real(np.vdot(rho, ax)))
        root = math.sqrt(max(psi.real(ax @ ax), 0.0))
        lower.append(fx - m * px)
        upper.append(M * root - fx)
        if root > 1e-12:
            ratios.append(fx / root)
    return {
        "count": len(lower),
        "min_lower": float(min(lower)) if lower else 0.0,
        "min_upper": float(min(upper)) if upper else 0.0,
        "max_ratio": float(max(ratios)) if ratios else 0.0,
    }


def restriction_chain(E: TernarySubspace, psi: StateFunctional, rho, scale: float, m: float, probes) -> float:
    """Smallest slack of m psi(|x|) <= c psi(|x|) = phi(|x|) <= psi(|x|) <= psi(|x|^2)^(1/2)."""
    rho = as_matrix(rho)
    worst = math.inf
    for x in probes:
        ax = abs_of(x)
        px = psi.real(ax)
        fx = float(np.real(np.vdot(rho, ax)))
        root = math.sqrt(max(psi.real(ax @ ax), 0.0))
        slacks = [scale * px - m * px, -abs(fx - scale * px), px - fx, root - px]
        worst = min(worst, *slacks)
    return worst


def _probe_relaxation(E1, psi1, P1, E2, psi2, P2, m, M, config) -> FeasibilityCertificate:
    """Ambient state with m psi_i(|x|) <= phi(|x|) <= M psi_i(|x|^2)^(1/2) on finitely many probes."""
    problem = _problem(E1.inner_algebra.n, config)
    for tag, psi, probes in (("E1", psi1, P1), ("E2", psi2, P2)):
        for k, x in enumerate(probes):
            ax = abs_of(x)
            lo = m * psi.real(ax)
            hi = M * math.sqrt(max(psi.real(ax @ ax), 0.0))
            s = problem.add_variable(f"{tag}-slack[{k}]", 0.0, max(hi - lo, 0.0))
            problem.add(ax, lo, [(s, 1.0)], label=f"{tag}-probe[{k}]")
    cert = solve_feasibility(problem)
    if not cert.exact_contradiction:
        cert.method = "probe-relaxation"
    return cert


def _require_ternary(E: TernarySubspace, name: str):
    defect = E.ternary_defect()
    if defect > 1e-8:
        raise NotTernary(f"{name} is not ternary (defect {defect:.2e})")


def _state_summary(state: StateFunctional) -> dict:
    return {"note": state.note, "witness": state.witness}


def module_independence_certify(E1: TernarySubspace, E2: TernarySubspace, m: float = 0.5, M: float = 1.0,
                                probes: int | None = None, seed: int | None = None, budget: int = 8,
                                config: RunConfig | None = None, use_screen: bool = True) -> IndependenceVerdict:
    config = (config or RunConfig()).replace(seed=seed, random_probes=probes)
    if not 0.0 < m <= M:
        raise ValueError(f"need 0 < m <= M, got m={m}, M={M}")
    _require_ternary(E1, "E1")
    _require_ternary(E2, "E2")
    methods, evidence, notes = [], [], []

    screen = intersection_scalar_check(E1, E2) if E1.shape == E2.shape else {"screen": "inapplicable"}
    if screen["screen"] == "inapplicable":
        notes.append("intersection screen inapplicable (intersection not ternary)")
    if use_screen and screen["screen"] == "fail":
        x, y = screen["witness_pair"]
        return IndependenceVerdict(
            "NotIndependent", None, [{"screen": {k: screen[k] for k in ("intersection_dim", "inner_dim", "screen")}}],
            ["intersection-scalar-screen"],
            {"kind": "distinct-abs-pair", "x": x, "y": y, "abs_x": abs_of(x), "abs_y": abs_of(y)},
            exact=True, notes=["necessary condition violated: inner span of the intersection has dimension "
                               f"{screen['inner_dim']} > 1"])

    A1, A2 = E1.inner_algebra, E2.inner_algebra
    F1 = extreme_states(A1, budget, config.seed)
    F2 = extreme_states(A2, budget, config.seed + 1)
    exact = F1.exact and F2.exact
    if not exact:
        notes.append(f"pure states sampled ({F1.kind}: {len(F1)}, {F2.kind}: {len(F2)}); "
                     "exact extension of sampled states is tested, not assumed")
    rng = np.random.default_rng(config.seed)
    P1 = E1.probes(rng, config.random_probes)
    P2 = E2.probes(rng, config.random_probes)
    self_modules = E1.is_self_module() and E2.is_self_module()
    pure_kinds = {"commutative-exact", "full-matrix-sampled"}

    scales, uppers = [], []
    all_feasible = True
    for i, psi1 in enumerate(F1):
        for j, psi2 in enumerate(F2):
            cert = scalar_restriction_check(A1, psi1, A2, psi2, m, config)
            record = {"pair": [i, j], "states": [psi1.note, psi2.note], "certificate": cert}
            if cert.feasible:
                s1 = window_slacks(E1, psi1, cert.witness, m, M, P1)
                s2 = window_slacks(E2, psi2, cert.witness, m, M, P2)
                record["probe_slacks"] = [s1, s2]
                evidence.append(record)
                scales += [cert.scales["c1"], cert.scales["c2"]]
                uppers += [s1["max_ratio"], s2["max_ratio"]]
                if min(s1["min_lower"], s1["min_upper"], s2["min_lower"], s2["min_upper"]) < -1e-8:
                    all_feasible = False
                    notes.append(f"probe check failed for pair {(i, j)}")
                continue
            all_feasible = False
            # refutation
            if self_modules and F1.kind in pure_kinds and F2.kind in pure_kinds:
                floor = scalar_restriction_check(A1, psi1, A2, psi2, M_FLOOR, config) if cert.infeasible else cert
                record["floor_certificate"] = floor
                evidence.append(record)
                if cert.infeasible and floor.infeasible:
                    return IndependenceVerdict(
                        "NotIndependent", None, evidence, ["scalar-restriction", "pure-state-reduction"],
                        {"kind": "state-pair", "pair": [i, j], "states": [_state_summary(psi1), _state_summary(psi2)],
                         "gap": floor.gap, "exact_contradiction": floor.exact_contradiction},
                        exact=True, notes=notes + [f"no admissible ambient state for any m >= {M_FLOOR:g}"])
            else:
                relax = _probe_relaxation(E1, psi1, P1, E2, psi2, P2, m, M, config)
                record["relaxation"] = relax
                if relax.infeasible:
                    wide = _probe_relaxation(E1, psi1, P1, E2, psi2, P2, M_FLOOR, 1.0 / M_FLOOR, config)
                    record["wide_relaxation"] = wide
                    evidence.append(record)
                    if wide.infeasible:
                        return IndependenceVerdict(
                            "NotIndependent", None, evidence, ["probe-relaxation"],
                            {"kind": "state-pair", "pair": [i, j],
                             "states": [_state_summary(psi1), _state_summary(psi2)], "gap": wide.gap,
                             "exact_contradiction": wide.exact_contradiction},
                            exact=True, notes=notes + [f"no admissible ambient state on the probe set for "
                                                       f"{M_FLOOR:g} <= m <= M <= {1 / M_FLOOR:g}"])
                else:
                    evidence.append(record)
            notes.append(f"pair {(i, j)} not certified at m = {m:g}")

    methods = ["scalar-restriction", "pure-state-reduction"]
    if all_feasible:
        window = (float(min(scales)) if scales else 1.0, 1.0)
        cstar = bool(scales) and min(scales) > 1.0 - 1e-6
        return IndependenceVerdict("ModuleIndependent", window, evidence, methods, None, exact, cstar, notes,
                                   max(uppers) if uppers else None)
    return IndependenceVerdict("Inconclusive", None, evidence, methods, None, False, False, notes)


def cstar_independence_certify(A1: StarSubalgebra, A2: StarSubalgebra, budget: int = 8,
                               config: RunConfig | None = None) -> IndependenceVerdict:
    """Common extensions for all pure-state pairs."""
    config = config or RunConfig()
    F1 = extreme_states(A1, budget, config.seed)
    F2 = extreme_states(A2, budget, config.seed + 1)
    evidence = []
    for i, psi1 in enumerate(F1):
        for j, psi2 in enumerate(F2):
            cert = cstar_extension_check(A1, psi1, A2, psi2, config)
            evidence.append({"pair": [i, j], "states": [psi1.note, psi2.note], "certificate": cert})
            if cert.infeasible:
                return IndependenceVerdict(
                    "NotIndependent", None, evidence, ["common-extension"],
                    {"kind": "state-pair", "pair": [i, j], "states": [_state_summary(psi1), _state_summary(psi2)],
                     "gap": cert.gap, "exact_contradiction": cert.exact_contradiction}, exact=True)
            if not cert.feasible:
                return IndependenceVerdict("Inconclusive", None, evidence, ["common-extension"])
    return IndependenceVerdict("CStarIndependent", (1.0, 1.0), evidence, ["common-extension", "pure-state-reduction"],
                               None, F1.exact and F2.exact, True)


# -- norm multiplicativity ---------------------------------------------------


def _project(A: StarSubalgebra, G) -> np.ndarray:
    return A.element(A.coefficients(G))


def _top_singular(a) -> float:
    # hot path of the descent: skips the input checks of operator_norm
    return float(np.linalg.svd(a, compute_uv=False)[0])


def _normalized(a) -> np.ndarray:
    return a / _top_singular(a)


def _spectral_starts(A: StarSubalgebra) -> list:
    """Spectral projections of basis elements that lie in the algebra."""
    out = []
    for b in A.basis:
        w, V = herm_eig(b, tol=1e-8)
        start = 0
        for k in range(1, w.size + 1):
            if k == w.size or w[k] - w[k - 1] > 1e-7:
                P = V[:, start:k] @ V[:, start:k].conj().T
                if A.contains(P, 1e-7) and not any(np.allclose(P, Q, atol=1e-9) for Q in out):
                    out.append(P)
                start = k
    return out


def _descend(A1, A2, a, b, steps: int = 200):
    a, b = _normalized(a), _normalized(b)
    f = _top_singular(a @ b)
    eta = 0.5
    for _ in range(steps):
        U, s, Vh = np.linalg.svd(a @ b)
        outer = np.outer(U[:, 0], Vh[0])
        Ga = _project(A1, outer @ b.conj().T)
        Gb = _project(A2, a.conj().T @ outer)
        improved = False
        while eta > 1e-9:
            na, nb = a - eta * Ga, b - eta * Gb
            if _top_singular(na) < 1e-12 or _top_singular(nb) < 1e-12:
                eta *= 0.5
                continue
            na, nb = _normalized(na), _normalized(nb)
            nf = _top_singular(na @ nb)
            if nf < f - 1e-13:
                a, b, f = na, nb, nf
                eta = min(2.0 * eta, 4.0)
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
    return f, a, b


def _commuting(A1: StarSubalgebra, A2: StarSubalgebra, tol: float = 1e-9) -> bool:
    mats = list(A1.basis) + list(A2.basis)
    return all(np.linalg.norm(x @ y - y @ x) <= tol for i, x in enumerate(mats) for y in mats[i + 1:])


def norm_multiplicativity_check(A1: StarSubalgebra, A2: StarSubalgebra, restarts: int | None = None,
                                seed: int | None = None, tol: float | None = None,
                                config: RunConfig | None = None) -> dict:
    """Estimate mu = min ||ab|| over norm-one a in A1, b in A2."""
    config = (config or RunConfig()).replace(restarts=restarts, seed=seed, tol=tol)
    tol = config.tol
    if _commuting(A1, A2):
        P = minimal_projections(A1)
        Q = minimal_projections(A2)
        if P is not None and Q is not None:
            for p in P:
                for q in Q:
                    if operator_norm(p @ q) < 1e-9:
                        return {"status": "violated", "mu": 0.0, "exact": True, "method": "commuting-projections",
                                "witness": {"a": p, "b": q, "norm_ab": operator_norm(p @ q)}}
            return {"status": "multiplicative", "mu": 1.0, "exact": True, "method": "commuting-projections",
                    "witness": None}
    rng = np.random.default_rng(config.seed)
    starts = [(p, q) for p in _spectral_starts(A1) for q in _spectral_starts(A2)][: config.restarts]
    starts += [(A1.random_element(rng), A2.random_element(rng)) for _ in range(config.restarts)]
    best = (math.inf, -1, None, None)
    for idx, (a, b) in enumerate(starts):
        if operator_norm(a) < 1e-12 or operator_norm(b) < 1e-12:
            continue
        f, a, b = _descend(A1, A2, a, b)
        if (f, idx) < best[:2]:
            best = (f, idx, a, b)
    mu, _, a, b = best
    witness = {"a": a, "b": b, "norm_ab": mu, "norm_a": operator_norm(a), "norm_b": operator_norm(b)}
    if mu > 1.0 - tol:
        status = "multiplicative"
    elif mu < 1.0 - 10.0 * tol:
        status = "violated"
    else:
        status = "inconclusive"
    return {"status": status, "mu": float(mu), "exact": False, "method": "projected-descent",
            "starts": len(starts), "witness": witness if status != "multiplicative" else None}


def find_unit_anchor(E1: TernarySubspace, E2: TernarySubspace, seed: int = 0):
    """An element z0 of both modules with <z0, z0> = 1, or ``None``.

    The polar part of a generic element of the (ternary) intersection lies in
    it; it is an anchor exactly when its initial projection is the identity.
    """
    if E1.shape != E2.shape:
        return None
    meet = intersect(E1, E2)
    if not isinstance(meet, TernarySubspace) or meet.dim == 0:
        return None
    x = meet.random_element(np.random.default_rng(seed))
    w, V = herm_eig(x.conj().T @ x, tol=1e-8)
    if w.min() <= 1e-10 * max(1.0, w.max()):
        return None
    z = x @ (V * (1.0 / np.sqrt(w))) @ V.conj().T
    if not meet.contains(z, 1e-7) or not verify_unit_inner(z, tol=1e-8)["identity"]:
        return None
    return z


def ffss_criterion(E1: TernarySubspace, E2: TernarySubspace, z0, restarts: int | None = None,
                   seed: int | None = None, config: RunConfig | None = None) -> IndependenceVerdict:
    """Module independence through norm multiplicativity of the deformed images."""
    z0 = as_matrix(z0)
    if z0.shape != E1.shape or not verify_unit_inner(z0, tol=1e-9)["identity"]:
        raise AnchorNotUnit("<z0, z0> is not the identity")
    if not (E1.contains(z0, 1e-8) and E2.contains(z0, 1e-8)):
        raise AnchorNotShared("anchor must lie in both modules")
    D1 = build_deformed(E1, z0)
    D2 = build_deformed(E2, z0)
    report = norm_multiplicativity_check(D1.image, D2.image, restarts, seed, config=config)
    evidence = [{"norm_multiplicativity": {k: v for k, v in report.items() if k != "witness"}}]
    methods = ["deformation", "norm-multiplicativity"]
    if report["status"] == "multiplicative":
        return IndependenceVerdict("ModuleIndependent", None, evidence, methods, None, report["exact"])
    if report["status"] == "violated":
        return IndependenceVerdict("NotIndependent", None, evidence, methods, report["witness"], True)
    return IndependenceVerdict("Inconclusive", None, evidence, methods, None, False,
                               notes=[f"best product norm {report['mu']:.3e} within tolerance band"])


# -- criteria with fixed elements --------------------------------------------


def _require_unit_action(z, algebra: StarSubalgebra, squared: bool, name: str):
    report = verify_unit_inner(z, algebra)
    key = "square_acts_as_unit" if squared else "acts_as_unit"
    if not report[key]:
        power = "|z|^2" if squared else "|z|"
        raise ValueError(f"{power} does not act as the unit of <{name}, {name}>")


def probe_pairs(E1: TernarySubspace, E2: TernarySubspace, rng: np.random.Generator, n_random: int = 10) -> list:
    """Norm-one pairs: every basis pair plus seeded random pairs."""
    pairs = [(x / module_norm(x), y / module_norm(y)) for x in E1.basis for y in E2.basis]
    for _ in range(n_random):
        x, y = E1.random_element(rng), E2.random_element(rng)
        pairs.append((x / module_norm(x), y / module_norm(y)))
    return pairs


def single_state_criterion(E1: TernarySubspace, E2: TernarySubspace, z1, z2, m: float, M: float,
                           pairs=None, seed: int = 42, config: RunConfig | None = None) -> dict:
    """For each probe pair, is there phi with m <= phi(|x_i|) = phi(|z_i|) <= M?"""
    config = config or RunConfig()
    z1, z2 = as_matrix(z1), as_matrix(z2)
    _require_unit_action(z1, E1.inner_algebra, False, "E1")
    _require_unit_action(z2, E2.inner_algebra, False, "E2")
    if pairs is None:
        pairs = probe_pairs(E1, E2, np.random.default_rng(seed))
    az = (abs_of(z1), abs_of(z2))
    rows = []
    for k, (x1, x2) in enumerate(pairs):
        problem = _problem(E1.inner_algebra.n, config)
        for i, (x, zabs) in enumerate(zip((x1, x2), az)):
            s = problem.add_variable(f"s{i + 1}", m, M)
            problem.add(abs_of(x) - zabs, 0.0, label=f"equal[{i + 1}]")
            problem.add(zabs, 0.0, [(s, 1.0)], label=f"box[{i + 1}]")
        cert = solve_feasibility(problem)
        rows.append({"pair": k, "status": cert.status, "gap": cert.gap, "certificate": cert})
    statuses = [r["status"] for r in rows]
    return {"pairs": len(rows), "feasible": statuses.count("Feasible"),
            "infeasible": [r["pair"] for r in rows if r["status"] == "Infeasible"],
            "all_feasible": all(s == "Feasible" for s in statuses), "rows": rows}


def _one_sided_state(n, config, own, other, m1, M1, tag) -> FeasibilityCertificate:
    """phi~ with phi~(|z|) <= M' psi_other(|z|^2)^(1/2) on the other module and
    m' psi_own(|z|) <= phi~(|z|) <= M' psi_own(|z|^2)^(1/2) on its own module."""
    problem = _problem(n, config)
    psi, probes = own
    for k, x in enumerate(probes):
        ax = abs_of(x)
        lo = m1 * psi.real(ax)
        hi = M1 * math.sqrt(max(psi.real(ax @ ax), 0.0))
        s = problem.add_variable(f"{tag}-own[{k}]", 0.0, max(hi - lo, 0.0))
        problem.add(ax, lo, [(s, 1.0)], label=f"{tag}-own[{k}]")
    psi, probes = other
    for k, x in enumerate(probes):
        ax = abs_of(x)
        hi = M1 * math.sqrt(max(psi.real(ax @ ax), 0.0))
        s = problem.add_variable(f"{tag}-other[{k}]", 0.0)
        problem.add(ax, hi, [(s, -1.0)], label=f"{tag}-other[{k}]")
    cert = solve_feasibility(problem)
    if not cert.exact_contradiction:
        cert.method = "two-state-relaxation"
    return cert


def two_state_criterion(E1: TernarySubspace, E2: TernarySubspace, z1, z2, mprime: float, Mprime: float,
                        pairs=None, seed: int = 42, n_probes: int = 20, config: RunConfig | None = None) -> dict:
    """Search phi~1, phi~2 on probe relaxations and test phi = (phi~1 + phi~2) / 2 with m = m'/2, M = M'."""
    config = config or RunConfig()
    z1, z2 = as_matrix(z1), as_matrix(z2)
    _require_unit_action(z1, E1.inner_algebra, True, "E1")
    _require_unit_action(z2, E2.inner_algebra, True, "E2")
    rng = np.random.default_rng(seed)
    if pairs is None:
        pairs = probe_pairs(E1, E2, rng, n_random=2)
    P1 = E1.probes(rng, n_probes)
    P2 = E2.probes(rng, n_probes)
    n = E1.inner_algebra.n
    rows = []
    for k, (x1, x2) in enumerate(pairs):
        psi1 = norming_state(abs_of(x1) @ abs_of(x1), E1.inner_algebra)
        psi2 = norming_state(abs_of(x2) @ abs_of(x2), E2.inner_algebra)
        c1 = _one_sided_state(n, config, (psi1, P1), (psi2, P2), mprime, Mprime, "t1")
        c2 = _one_sided_state(n, config, (psi2, P2), (psi1, P1), mprime, Mprime, "t2")
        row = {"pair": k, "status": [c1.status, c2.status], "certificates": [c1, c2], "combined": None}
        if c1.feasible and c2.feasible:
            rho = 0.5 * (c1.witness + c2.witness)
            s1 = window_slacks(E1, psi1, rho, mprime / 2, Mprime, P1)
            s2 = window_slacks(E2, psi2, rho, mprime / 2, Mprime, P2)
            row["combined"] = {"witness": rho, "slacks": [s1, s2],
                               "passes": min(s1["min_lower"], s1["min_upper"], s2["min_lower"], s2["min_upper"]) >= -1e-8}
        rows.append(row)
    feasible = all(r["combined"] is not None for r in rows)
    return {"pairs": len(rows), "relaxations_feasible": feasible,
            "infeasible": [r["pair"] for r in rows if r["combined"] is None],
            "combined_passes": feasible and all(r["combined"]["passes"] for r in rows),
            "window": (mprime / 2, Mprime), "rows": rows}


def definite_criterion_verify(E1: TernarySubspace, E2: TernarySubspace, z1, z2, x1, x2, phi, m: float, M: float,
                              tol: float = 1e-9) -> dict:
    """Check definiteness of phi / phi(|z_i|) at |x_i| and m <= phi(|x1|) = phi(|x1||x2|) = phi(|x2|) <= M."""
    rho = phi.witness if isinstance(phi, StateFunctional) else as_matrix(phi)

    def value(a):
        return complex(np.vdot(rho, a))

    out = {"definite": [], "definite_slack": []}
    ax = (abs_of(x1), abs_of(x2))
    for z, a in zip((z1, z2), ax):
        d = value(abs_of(z)).real
        if d < 1e-12:
            raise DivisionByZero(f"phi(|z|) = {d:.3e}")
        slack = (value(a).real / d) ** 2 - value(a @ a).real / d
        out["definite_slack"].append(slack)
        out["definite"].append(slack >= -tol)
    v1, v2 = value(ax[0]).real, value(ax[1]).real
    v12 = value(ax[0] @ ax[1])
    out.update(values=[v1, v12.real, v2], imag=v12.imag,
               chain_slacks={"lower": v1 - m, "left_eq": -abs(v1 - v12), "right_eq": -abs(v12 - v2), "upper": M - v2})
    out["chain"] = all(s >= -tol for s in out["chain_slacks"].values()) and abs(v12.imag) <= tol
    out["passes"] = out["chain"] and all(out["definite"])
    return out


# -- quasi extension and S-independence ---------------------------------------


def qep_check(B: StarSubalgebra, ambient: StarSubalgebra | None = None, restarts: int = 64, seed: int = 42,
              tol: float = 1e-8) -> dict:
    """Does some vector state annihilate B?"""
    if ambient is not None and not ambient.is_full():
        raise AmbientNotFull("pure states are vector states only for a full matrix ambient")
    n = B.n
    if B.contains_identity():
        return {"status": "holds", "exact": True, "method": "identity-in-algebra", "witness": None, "residual": None}

    def objective(xi):
        return float(sum(abs(np.vdot(xi, b @ xi)) ** 2 for b in B.basis))

    # every finite-dimensional C*-algebra has a unit e; any unit vector in ker e is annihilating
    rng = np.random.default_rng(seed)
    starts = []
    if B.unit is not None:
        w, V = herm_eig(B.unit, tol=1e-8)
        starts = [V[:, k] for k in range(n) if w[k] < 0.5]
    starts += [random_unit_vector(rng, n) for _ in range(restarts)]
    best = (math.inf, -1, None)
    for idx, xi in enumerate(starts):
        xi = xi / np.linalg.norm(xi)
        f = objective(xi)
        step = 0.5
        for _ in range(300):
            if f < 1e-30:
                break
            grad = sum(2.0 * np.real(np.vdot(xi, b @ xi)) * 2.0 * (b @ xi) for b in B.basis)
            grad = grad - np.vdot(xi, grad) * xi
            moved = False
            while step > 1e-12:
                cand = xi - step * grad
                cand = cand / np.linalg.norm(cand)
                fc = objective(cand)
                if fc < f:
                    xi, f, moved = cand, fc, True
                    step *= 1.5
                    break
                step *= 0.5
            if not moved:
                break
        if (f, idx) < best[:2]:
            best = (f, idx, xi)
    f, _, xi = best
    residual = max(abs(np.vdot(xi, b @ xi)) for b in B.basis) if B.dim else 0.0
    if f < tol ** 2:
        return {"status": "violated", "exact": B.unit is not None, "method": "kernel-of-unit+descent",
                "witness": xi, "residual": float(residual)}
    return {"status": "likely-holds", "exact": False, "method": "descent", "witness": None,
            "residual": float(residual), "minimum": f}


def s_independence_probe(A1: StarSubalgebra, A2: StarSubalgebra, restarts: int = 64, seed: int = 42,
                         tol: float = 1e-8) -> dict:
    """Search for nonzero a, b with ab = 0; no positive claim is ever made."""
    report = norm_multiplicativity_check(A1, A2, restarts, seed, tol)
    violation = report["mu"] < tol
    return {"min_product_norm": report["mu"], "violation": violation,
            "witness": report["witness"] if violation else None, "method": report["method"],
            "claim": "violation found" if violation else "no violation found"}
