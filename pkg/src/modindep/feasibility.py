"""State-extension feasibility over the spectahedron by Dykstra alternating projections.

A problem asks for a density matrix rho and auxiliary scalars u (scales and
slacks, each confined to a box) with

    Re tr(rho G_j) = t_j + sum_k a_jk u_k      for every constraint j.

The convex set C is {rho >= 0, tr rho = 1} x boxes; the affine set A is the
constraint system together with tr rho = 1.  The real vectorization of rho is
``[Re rho.ravel(), Im rho.ravel()]`` so that the Euclidean norm is Frobenius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadProblem
from .linalg import as_matrix, hermitian_defect, matrix_to_json, project_spectahedron

CERTIFICATE_VERSION = 1
STALL_CHECKS = 50


@dataclass(frozen=True)
class Variable:
    name: str
    lo: float
    hi: float = math.inf

    def start(self) -> float:
        return 0.5 * (self.lo + self.hi) if math.isfinite(self.hi) else self.lo


@dataclass(frozen=True, eq=False)
class Constraint:
    matrix: np.ndarray
    target: float
    coeffs: tuple = ()  # (variable index, coefficient) pairs
    label: str = ""


@dataclass(eq=False)
class FeasibilityProblem:
    n: int
    constraints: list = field(default_factory=list)
    variables: list = field(default_factory=list)
    tol: float = 1e-8
    max_iter: int = 50000
    seed: int = 42
    check_every: int = 5

    def __post_init__(self):
        for j, c in enumerate(self.constraints):
            G = as_matrix(c.matrix)
            if G.shape != (self.n, self.n):
                raise BadProblem(f"constraint {j} has shape {G.shape}, expected {(self.n, self.n)}")
            if hermitian_defect(G) > 1e-9 * max(1.0, float(np.abs(G).max(initial=0.0))):
                raise BadProblem(f"constraint {j} matrix is not Hermitian")
            for k, _ in c.coeffs:
                if not 0 <= k < len(self.variables):
                    raise BadProblem(f"constraint {j} refers to unknown variable {k}")
        for v in self.variables:
            if not v.lo <= v.hi:
                raise BadProblem(f"empty box for variable {v.name}")

    def add_variable(self, name: str, lo: float, hi: float = math.inf) -> int:
        self.variables.append(Variable(name, float(lo), float(hi)))
        return len(self.variables) - 1

    def add(self, matrix, target: float, coeffs=(), label: str = "") -> None:
        G = as_matrix(matrix)
        if G.shape != (self.n, self.n) or hermitian_defect(G) > 1e-9 * max(1.0, float(np.abs(G).max(initial=0.0))):
            raise BadProblem(f"constraint {label or len(self.constraints)} matrix is not Hermitian of size {self.n}")
        G = 0.5 * (G + G.conj().T)
        self.constraints.append(Constraint(G, float(target), tuple(coeffs), label))

    def residuals(self, rho, u=()) -> np.ndarray:
        """Constraint residuals recomputed from scratch, independent of the solver."""
        rho = as_matrix(rho)
        u = np.asarray(u, dtype=float)
        out = []
        for c in self.constraints:
            lhs = float(np.real(np.vdot(c.matrix, rho)))
            rhs = c.target + sum(a * u[k] for k, a in c.coeffs)
            out.append(lhs - rhs)
        return np.array(out)


@dataclass(eq=False)
class FeasibilityCertificate:
    status: str  # "Feasible" | "Infeasible" | "Inconclusive"
    witness: np.ndarray | None
    scales: dict
    gap: float | None
    iterations: int
    residuals: list
    exact_contradiction: bool = False
    seed: int = 42
    tol: float = 1e-8
    method: str = "dykstra"
    labels: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == "Feasible"

    @property
    def infeasible(self) -> bool:
        return self.status == "Infeasible"

    def to_json(self) -> dict:
        return {
            "version": CERTIFICATE_VERSION,
            "status": self.status,
            "witness": None if self.witness is None else matrix_to_json(self.witness),
            "scales": {k: float(v) for k, v in self.scales.items()},
            "gap": None if self.gap is None else float(self.gap),
            "residuals": [float(r) for r in self.residuals],
            "iterations": int(self.iterations),
            "exact_contradiction": self.exact_contradiction,
            "seed": int(self.seed),
            "tolerances": {"tol": float(self.tol)},
            "method": self.method,
        }


class _Geometry:
    """Vectorized constraint system and the two projections."""

    def __init__(self, problem: FeasibilityProblem):
        n = problem.n
        self.n = n
        self.N = n * n
        self.k = len(problem.variables)
        rows, rhs = [], []
        for c in problem.constraints:
            row = np.zeros(2 * self.N + self.k)
            row[: self.N] = c.matrix.real.ravel()
            row[self.N: 2 * self.N] = c.matrix.imag.ravel()
            for k, a in c.coeffs:
                row[2 * self.N + k] -= a
            rows.append(row)
            rhs.append(c.target)
        trace_row = np.zeros(2 * self.N + self.k)
        trace_row[: self.N] = np.eye(n).ravel()
        rows.append(trace_row)
        rhs.append(1.0)
        A = np.array(rows)
        t = np.array(rhs)
        self.A_raw, self.t_raw = A, t
        scale = np.linalg.norm(A, axis=1)
        # rows that are roundoff-level zero would be inflated into spurious constraints
        null = scale <= 1e-11 * max(1.0, float(scale.max()))
        A[null] = 0.0
        scale[null] = 1.0
        self.A = A / scale[:, None]
        self.t = t / scale
        self.pinv = np.linalg.pinv(self.A, rcond=1e-10)
        self.lo = np.array([v.lo for v in problem.variables])
        self.hi = np.array([v.hi for v in problem.variables])

    def affine_inconsistency(self) -> float:
        """Least-squares residual of the (row-normalized) affine system alone."""
        x = self.pinv @ self.t
        return float(np.linalg.norm(self.A @ x - self.t))

    def rho_of(self, x) -> np.ndarray:
        return (x[: self.N] + 1j * x[self.N: 2 * self.N]).reshape(self.n, self.n)

    def pack(self, rho, u) -> np.ndarray:
        return np.concatenate([rho.real.ravel(), rho.imag.ravel(), np.asarray(u, dtype=float)])

    def start(self, problem) -> np.ndarray:
        u = [v.start() for v in problem.variables]
        return self.pack(np.eye(self.n, dtype=complex) / self.n, u)

    def project_affine(self, x) -> np.ndarray:
        return x - self.pinv @ (self.A @ x - self.t)

    def project_convex(self, x) -> np.ndarray:
        R = self.rho_of(x)
        rho = project_spectahedron(0.5 * (R + R.conj().T))
        u = np.clip(x[2 * self.N:], self.lo, self.hi)
        return self.pack(rho, u)

    def raw_residuals(self, x) -> np.ndarray:
        return self.A_raw @ x - self.t_raw

    def support(self, w) -> float:
        """Support function of C at w."""
        W = self.rho_of(w)
        top = float(np.linalg.eigvalsh(0.5 * (W + W.conj().T))[-1])
        box = 0.0
        for wk, lo, hi in zip(w[2 * self.N:], self.lo, self.hi):
            if wk > 0:
                if not math.isfinite(hi):
                    return math.inf
                box += wk * hi
            else:
                box += wk * lo
        return top + box

    def polish(self, z, problem, tol):
        """Exact solve restricted to the face of C picked out by z.

        Keeps the eigenvectors of rho above a cutoff, pins auxiliary variables
        that sit on a box face, and solves the remaining equalities by minimum
        norm correction.  Returns a point of C meeting every constraint within
        ``tol``, or ``None``.
        """
        rho = self.rho_of(z)
        rho = 0.5 * (rho + rho.conj().T)
        w, V = np.linalg.eigh(rho)
        u0 = z[2 * self.N:]
        for cut in (1e-9, 1e-7, 1e-5, 1e-3, 1e-2, 5e-2):
            keep = V[:, w > cut]
            r = keep.shape[1]
            if r == 0:
                continue
            pinned = (u0 - self.lo <= cut) | (self.hi - u0 <= cut)
            u_fixed = np.where(u0 - self.lo <= cut, self.lo, np.where(self.hi - u0 <= cut, self.hi, u0))
            free = np.flatnonzero(~pinned)
            rows, rhs = [], []
            for c in problem.constraints + [None]:
                G = np.eye(self.n) if c is None else c.matrix
                Gk = keep.conj().T @ G @ keep
                row = np.concatenate([Gk.real.ravel(), Gk.imag.ravel(), np.zeros(free.size)])
                target = 1.0 if c is None else c.target
                for k, a in (() if c is None else c.coeffs):
                    if pinned[k]:
                        target += a * u_fixed[k]
                    else:
                        row[2 * r * r + int(np.searchsorted(free, k))] -= a
                rows.append(row)
                rhs.append(target)
            B, b = np.array(rows), np.array(rhs)
            X0 = np.diag(w[w > cut]).astype(complex)
            y0 = np.concatenate([X0.real.ravel(), X0.imag.ravel(), u0[free]])
            y = y0 - np.linalg.lstsq(B, B @ y0 - b, rcond=None)[0]
            X = (y[: r * r] + 1j * y[r * r: 2 * r * r]).reshape(r, r)
            X = 0.5 * (X + X.conj().T)
            if np.linalg.eigvalsh(X)[0] < -1e-13:
                continue
            u = u_fixed.copy()
            u[free] = y[2 * r * r:]
            if np.any(u < self.lo - 1e-13) or np.any(u > self.hi + 1e-13):
                continue
            u = np.clip(u, self.lo, self.hi)
            cand = self.pack(keep @ X @ keep.conj().T, u)
            if np.abs(self.raw_residuals(cand)).max() < tol:
                return cand
        return None

    def separation_bound(self, z) -> float:
        """Lower bound on dist(A, C) from the hyperplane normal to z - P_A(z), for z in C."""
        x = self.project_affine(z)
        w = x - z
        nw = float(np.linalg.norm(w))
        if nw <= 1e-300:
            return 0.0
        return (float(w @ x) - self.support(w)) / nw


def _target_interval(c: Constraint, variables) -> tuple:
    """Range of t + sum a_k u_k over the variable boxes."""
    lo = hi = c.target
    for k, a in c.coeffs:
        v = variables[k]
        ends = (a * v.lo, a * v.hi) if math.isfinite(v.hi) else (a * v.lo, math.copysign(math.inf, a))
        lo += min(ends)
        hi += max(ends)
    return lo, hi


def facial_reduction(problem: FeasibilityProblem, eps: float = 1e-12):
    """Shrink the ambient space using targets at an end of a constraint's spectrum.

    Since lambda_min(G) <= tr(rho G) <= lambda_max(G) for density matrices, a
    target that cannot drop below lambda_max(G) forces rho onto the top
    eigenspace of G (and symmetrically at the bottom); a target outside the
    spectrum is an exact contradiction.  Returns ``(V, gap)``: an isometry whose
    range carries every feasible rho, and the spectral gap of a contradiction
    (``None`` when there is none).
    """
    V = np.eye(problem.n, dtype=complex)
    intervals = [_target_interval(c, problem.variables) for c in problem.constraints]
    changed = True
    while changed:
        if V.shape[1] == 0:
            # only rho = 0 is left, which misses the trace constraint by 1
            return V, 1.0
        changed = False
        gap = _spectral_violation(problem, intervals, V)
        if gap is not None:
            return V, gap
        for c, (tlo, thi) in zip(problem.constraints, intervals):
            G = V.conj().T @ c.matrix @ V
            w, U = np.linalg.eigh(0.5 * (G + G.conj().T))
            scale = max(1.0, float(np.abs(w).max()))
            if w[-1] - w[0] <= eps * scale:
                continue
            if tlo >= w[-1] - eps * scale:
                V = V @ U[:, w >= w[-1] - 1e-9 * scale]
                changed = True
                break
            if thi <= w[0] + eps * scale:
                V = V @ U[:, w <= w[0] + 1e-9 * scale]
                changed = True
                break
    return V, None


def _spectral_violation(problem: FeasibilityProblem, intervals, V) -> float | None:
    """Largest distance from a target interval to the spectrum of the compressed constraint."""
    worst = None
    for c, (tlo, thi) in zip(problem.constraints, intervals):
        w = np.linalg.eigvalsh(V.conj().T @ c.matrix @ V)
        scale = max(1.0, float(np.abs(w).max()))
        excess = max(tlo - w[-1], w[0] - thi)
        if excess > 1e-9 * scale:
            worst = excess if worst is None else max(worst, excess)
    return worst


def solve_feasibility(problem: FeasibilityProblem) -> FeasibilityCertificate:
    labels = [c.label for c in problem.constraints]
    common = dict(seed=problem.seed, tol=problem.tol, labels=labels)
    inconsistency = _Geometry(problem).affine_inconsistency()
    if inconsistency > 1e-6:
        return FeasibilityCertificate("Infeasible", None, {}, inconsistency, 0, [], exact_contradiction=True,
                                      method="affine-contradiction", **common)
    V, gap = facial_reduction(problem)
    if gap is not None:
        return FeasibilityCertificate("Infeasible", None, {}, gap, 0, [], exact_contradiction=True,
                                      method="spectral-contradiction", **common)
    if V.shape[1] == problem.n:
        return _dykstra(problem, None)
    reduced = FeasibilityProblem(V.shape[1], [], list(problem.variables), problem.tol, problem.max_iter,
                                 problem.seed, problem.check_every)
    for c in problem.constraints:
        G = V.conj().T @ c.matrix @ V
        reduced.constraints.append(Constraint(0.5 * (G + G.conj().T), c.target, c.coeffs, c.label))
    if _Geometry(reduced).affine_inconsistency() > 1e-6:
        return FeasibilityCertificate("Infeasible", None, {}, _Geometry(reduced).affine_inconsistency(), 0, [],
                                      exact_contradiction=True, method="face-affine-contradiction", **common)
    cert = _dykstra(reduced, V)
    if cert.witness is not None:
        cert.witness = V @ cert.witness @ V.conj().T
        u = [cert.scales[v.name] for v in problem.variables]
        cert.residuals = list(problem.residuals(cert.witness, u))
        if np.abs(cert.residuals).max(initial=0.0) >= problem.tol:
            cert.status = "Inconclusive"
    cert.method = "face-reduced+" + cert.method
    return cert


def _dykstra(problem: FeasibilityProblem, face) -> FeasibilityCertificate:
    geo = _Geometry(problem)
    names = [v.name for v in problem.variables]
    common = dict(seed=problem.seed, tol=problem.tol, labels=[c.label for c in problem.constraints])
    z = geo.project_convex(geo.start(problem))
    q = np.zeros_like(z)
    best_gap = 0.0
    streak = 0
    it = 0
    for it in range(1, problem.max_iter + 1):
        x = geo.project_affine(z)
        y = x + q
        z = geo.project_convex(y)
        q = y - z
        if it % problem.check_every and it != problem.max_iter:
            continue
        res = geo.raw_residuals(z)
        if np.abs(res).max() < problem.tol:
            rho = geo.rho_of(z)
            rho = 0.5 * (rho + rho.conj().T)
            u = z[2 * geo.N:]
            return FeasibilityCertificate("Feasible", rho, dict(zip(names, u)), None, it,
                                          list(res[:-1]), **common)
        if np.abs(res).max() < 1e-2 and it % (20 * problem.check_every) == 0:
            polished = geo.polish(z, problem, problem.tol)
            if polished is not None:
                rho = geo.rho_of(polished)
                rho = 0.5 * (rho + rho.conj().T)
                res = geo.raw_residuals(polished)
                return FeasibilityCertificate("Feasible", rho, dict(zip(names, polished[2 * geo.N:])), None, it,
                                              list(res[:-1]), **{**common, "method": "dykstra+face-polish"})
        bound = geo.separation_bound(z)
        best_gap = max(best_gap, bound)
        streak = streak + 1 if bound > 10 * problem.tol else 0
        if streak >= STALL_CHECKS:
            return FeasibilityCertificate("Infeasible", None, {}, best_gap, it, list(res[:-1]), **common)
    res = geo.raw_residuals(z)
    status = "Infeasible" if best_gap > 10 * problem.tol else "Inconclusive"
    return FeasibilityCertificate(status, None, {}, best_gap, it, list(res[:-1]), **common)
