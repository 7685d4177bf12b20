"""Scenario files: parsing, validation, built-in examples and the runner.

A scenario is a JSON document naming algebras, modules, states and plain
matrices, followed by an ordered list of checks and optional expectations on
their results.  Complex entries are ``[re, im]`` pairs and matrices are
row-major nested lists.  Unset configuration keys take the defaults of
:class:`RunConfig` (tol 1e-8, max_iter 50000, restarts 64, seed 42).
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .algebra import StarSubalgebra, generated_subalgebra, make_state
from .certify import (_jsonable, cstar_extension_check, cstar_independence_certify, definite_criterion_verify,
                      ffss_criterion, module_independence_certify, norm_multiplicativity_check, qep_check,
                      scalar_restriction_check, single_state_criterion, two_state_criterion, window_slacks)
from .config import RunConfig, load_default_config
from .errors import CheckError, ModIndepError, ParseError, UnknownScenario, ValidationError
from .linalg import matrix_from_json, matrix_to_json, operator_norm, random_unitary
from .module import TernarySubspace, inner, intersection_scalar_check, module_norm, self_module, ternary_closure

FORMAT_VERSION = 1
CONFIG_KEYS = ("tol", "max_iter", "restarts", "seed", "random_probes")


@dataclass
class Check:
    op: str
    args: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


@dataclass
class Expectation:
    check: int
    path: str
    equals: object = None
    value: object = None
    tol: float = 1e-8
    min: float | None = None
    max: float | None = None
    one_of: list | None = None


@dataclass
class Scenario:
    name: str
    ambient_dim: int
    summary: str = ""
    config: dict = field(default_factory=dict)
    algebras: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)
    states: dict = field(default_factory=dict)
    elements: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def run_config(self, base: RunConfig | None = None) -> RunConfig:
        return (base or RunConfig()).replace(**{k: self.config.get(k) for k in CONFIG_KEYS})


# -- serialization -----------------------------------------------------------


def _mat_list(mats) -> list:
    return [matrix_to_json(m) for m in mats]


def _expectation_json(e: Expectation) -> dict:
    out = {"check": e.check, "path": e.path}
    if e.equals is not None:
        out["equals"] = e.equals
    if e.value is not None:
        out["value"] = e.value
        out["tol"] = e.tol
    if e.min is not None:
        out["min"] = e.min
    if e.max is not None:
        out["max"] = e.max
    if e.one_of is not None:
        out["one_of"] = e.one_of
    return out


def scenario_to_json(s: Scenario) -> dict:
    modules = {}
    for name, spec in s.modules.items():
        modules[name] = {"self": spec["self"]} if "self" in spec else {"generators": _mat_list(spec["generators"])}
    return {
        "format": FORMAT_VERSION,
        "name": s.name,
        "summary": s.summary,
        "ambient_dim": s.ambient_dim,
        "config": {**RunConfig().to_dict(), **s.config},
        "algebras": {k: {"generators": _mat_list(v["generators"]), "adjoin_unit": bool(v.get("adjoin_unit", False))}
                     for k, v in s.algebras.items()},
        "modules": modules,
        "states": {k: {**{r: v[r] for r in ("algebra", "module") if r in v}, "witness": matrix_to_json(v["witness"])}
                   for k, v in s.states.items()},
        "elements": {k: matrix_to_json(v) for k, v in s.elements.items()},
        "checks": [{"op": c.op, "args": dict(c.args), "params": dict(c.params)} for c in s.checks],
        "expectations": [_expectation_json(e) for e in s.expectations],
        "notes": list(s.notes),
    }


def serialize(s: Scenario) -> str:
    return json.dumps(scenario_to_json(s), indent=1) + "\n"


def _matrix(data, where: str) -> np.ndarray:
    try:
        return matrix_from_json(data)
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _require(obj, key, kind, where):
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    if not isinstance(obj[key], kind):
        raise ValidationError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}")
    return obj[key]


def scenario_from_json(data) -> Scenario:
    if not isinstance(data, dict):
        raise ValidationError("scenario must be a JSON object")
    fmt = data.get("format", FORMAT_VERSION)
    if fmt != FORMAT_VERSION:
        raise ValidationError(f"unsupported scenario format {fmt!r}")
    name = _require(data, "name", str, "scenario")
    n = _require(data, "ambient_dim", int, "scenario")
    config = dict(data.get("config", {}))
    unknown = set(config) - set(CONFIG_KEYS)
    if unknown:
        raise ValidationError(f"config: unknown keys {sorted(unknown)}")
    algebras = {}
    for k, v in data.get("algebras", {}).items():
        gens = _require(v, "generators", list, f"algebras.{k}")
        algebras[k] = {"generators": [_matrix(g, f"algebras.{k}.generators[{i}]") for i, g in enumerate(gens)],
                       "adjoin_unit": bool(v.get("adjoin_unit", False))}
    modules = {}
    for k, v in data.get("modules", {}).items():
        if "self" in v:
            modules[k] = {"self": _require(v, "self", str, f"modules.{k}")}
        else:
            gens = _require(v, "generators", list, f"modules.{k}")
            modules[k] = {"generators": [_matrix(g, f"modules.{k}.generators[{i}]") for i, g in enumerate(gens)]}
    states = {}
    for k, v in data.get("states", {}).items():
        refs = {r: v[r] for r in ("algebra", "module") if r in v}
        if len(refs) != 1:
            raise ValidationError(f"states.{k}: give exactly one of 'algebra' or 'module'")
        states[k] = {**refs, "witness": _matrix(_require(v, "witness", list, f"states.{k}"), f"states.{k}.witness")}
    elements = {k: _matrix(v, f"elements.{k}") for k, v in data.get("elements", {}).items()}
    checks = []
    for i, c in enumerate(data.get("checks", [])):
        op = _require(c, "op", str, f"checks[{i}]")
        checks.append(Check(op, dict(c.get("args", {})), dict(c.get("params", {}))))
    expectations = []
    allowed = {f.name for f in dataclasses.fields(Expectation)}
    for i, e in enumerate(data.get("expectations", [])):
        if not isinstance(e, dict) or set(e) - allowed:
            raise ValidationError(f"expectations[{i}]: unknown fields {sorted(set(e) - allowed)}")
        expectations.append(Expectation(**e))
    s = Scenario(name, n, data.get("summary", ""), config, algebras, modules, states, elements, checks,
                 expectations, list(data.get("notes", [])))
    validate(s)
    return s


def parse(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    return scenario_from_json(data)


def load(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc.strerror}") from exc
    return parse(text)


# -- operations --------------------------------------------------------------


@dataclass(frozen=True)
class Operation:
    func: Callable
    refs: dict  # argument name -> namespace ("algebras", "modules", "states", "elements")
    stochastic: bool = False


class _Context:
    """Materialized objects of a scenario, built lazily and cached."""

    def __init__(self, s: Scenario):
        self.s = s
        self._cache = {}

    def algebra(self, name) -> StarSubalgebra:
        key = ("algebras", name)
        if key not in self._cache:
            spec = self.s.algebras[name]
            self._cache[key] = generated_subalgebra(spec["generators"], adjoin_ambient_unit=spec.get("adjoin_unit", False),
                                                    n=self.s.ambient_dim, label=name)
        return self._cache[key]

    def module(self, name) -> TernarySubspace:
        key = ("modules", name)
        if key not in self._cache:
            spec = self.s.modules[name]
            if "self" in spec:
                self._cache[key] = self_module(self.algebra(spec["self"]), label=name)
            else:
                self._cache[key] = ternary_closure(spec["generators"], label=name)
        return self._cache[key]

    def state(self, name):
        key = ("states", name)
        if key not in self._cache:
            spec = self.s.states[name]
            alg = self.algebra(spec["algebra"]) if "algebra" in spec else self.module(spec["module"]).inner_algebra
            self._cache[key] = make_state(alg, spec["witness"], note=name)
        return self._cache[key]

    def element(self, name) -> np.ndarray:
        return self.s.elements[name]

    def resolve(self, namespace, name):
        return {"algebras": self.algebra, "modules": self.module, "states": self.state,
                "elements": self.element}[namespace](name)


def _op_cstar_extension(a1, phi1, a2, phi2, config, **_):
    return cstar_extension_check(a1, phi1, a2, phi2, config).to_json()


def _op_scalar_restriction(a1, phi1, a2, phi2, config, m=0.5, **_):
    return scalar_restriction_check(a1, phi1, a2, phi2, m, config).to_json()


def _op_cstar_independence(a1, a2, config, budget=8, **_):
    return cstar_independence_certify(a1, a2, budget, config).to_json()


def _op_module_independence(e1, e2, config, m=0.5, M=1.0, budget=8, use_screen=True, **_):
    return module_independence_certify(e1, e2, m, M, budget=budget, config=config, use_screen=use_screen).to_json()


def _op_ffss(e1, e2, anchor, config, **_):
    return ffss_criterion(e1, e2, anchor, config=config).to_json()


def _op_norm_multiplicativity(a1, a2, config, **_):
    return _jsonable(norm_multiplicativity_check(a1, a2, config=config))


def _op_qep(algebra, config, **_):
    return _jsonable(qep_check(algebra, restarts=config.restarts, seed=config.seed, tol=config.tol))


def _op_intersection_screen(e1, e2, config, **_):
    return _jsonable(intersection_scalar_check(e1, e2))


def _op_window_probe(module, psi, ambient, config, m=0.5, M=1.0, slack_tol=1e-10, **_):
    """Slacks of the window inequalities for an explicit ambient state on probe elements."""
    probes = module.probes(np.random.default_rng(config.seed), config.random_probes)
    report = window_slacks(module, psi, ambient, m, M, probes)
    report["passes"] = min(report["min_lower"], report["min_upper"]) >= -slack_tol
    return report


def _op_inner_norms(x, y, config, **_):
    return {"inner_norm": operator_norm(inner(x, y)), "norm_product": module_norm(x) * module_norm(y)}


def _op_single_state(e1, e2, z1, z2, config, m=0.5, M=1.0, **_):
    report = single_state_criterion(e1, e2, z1, z2, m, M, seed=config.seed, config=config)
    return _jsonable({k: v for k, v in report.items() if k != "rows"} | {
        "rows": [{"pair": r["pair"], "status": r["status"], "gap": r["gap"]} for r in report["rows"]]})


def _op_two_state(e1, e2, z1, z2, config, mprime=1.0, Mprime=1.0, **_):
    report = two_state_criterion(e1, e2, z1, z2, mprime, Mprime, seed=config.seed, config=config)
    rows = [{"pair": r["pair"], "status": r["status"],
             "passes": None if r["combined"] is None else r["combined"]["passes"]} for r in report["rows"]]
    return _jsonable({k: v for k, v in report.items() if k != "rows"} | {"rows": rows})


def _op_definite_criterion(e1, e2, z1, z2, x1, x2, ambient, config, m=0.5, M=1.0, **_):
    return _jsonable(definite_criterion_verify(e1, e2, z1, z2, x1, x2, ambient, m, M))


def _op_module_summary(module, config, **_):
    return {"dim": module.dim, "inner_dim": module.inner_algebra.dim, "ternary_defect": module.ternary_defect(),
            "self_module": module.is_self_module()}


OPERATIONS = {
    "cstar_extension": Operation(_op_cstar_extension, {"a1": "algebras", "phi1": "states", "a2": "algebras",
                                                       "phi2": "states"}),
    "scalar_restriction": Operation(_op_scalar_restriction, {"a1": "algebras", "phi1": "states", "a2": "algebras",
                                                             "phi2": "states"}),
    "cstar_independence": Operation(_op_cstar_independence, {"a1": "algebras", "a2": "algebras"}),
    "module_independence": Operation(_op_module_independence, {"e1": "modules", "e2": "modules"}, True),
    "ffss": Operation(_op_ffss, {"e1": "modules", "e2": "modules", "anchor": "elements"}, True),
    "norm_multiplicativity": Operation(_op_norm_multiplicativity, {"a1": "algebras", "a2": "algebras"}, True),
    "qep": Operation(_op_qep, {"algebra": "algebras"}, True),
    "intersection_screen": Operation(_op_intersection_screen, {"e1": "modules", "e2": "modules"}),
    "window_probe": Operation(_op_window_probe, {"module": "modules", "psi": "states", "ambient": "elements"}, True),
    "inner_norms": Operation(_op_inner_norms, {"x": "elements", "y": "elements"}),
    "single_state": Operation(_op_single_state, {"e1": "modules", "e2": "modules", "z1": "elements",
                                                 "z2": "elements"}, True),
    "two_state": Operation(_op_two_state, {"e1": "modules", "e2": "modules", "z1": "elements", "z2": "elements"},
                           True),
    "definite_criterion": Operation(_op_definite_criterion, {"e1": "modules", "e2": "modules", "z1": "elements",
                                                             "z2": "elements", "x1": "elements", "x2": "elements",
                                                             "ambient": "elements"}),
    "module_summary": Operation(_op_module_summary, {"module": "modules"}),
}


def validate(s: Scenario) -> None:
    """Every reference resolves, shapes agree and stochastic checks carry a seed."""
    n = s.ambient_dim
    if n < 1:
        raise ValidationError("ambient_dim must be positive")
    for k, v in s.algebras.items():
        for i, g in enumerate(v["generators"]):
            if g.shape != (n, n):
                raise ValidationError(f"algebras.{k}.generators[{i}]: shape {g.shape}, expected {(n, n)}")
    for k, v in s.modules.items():
        if "self" in v:
            if v["self"] not in s.algebras:
                raise ValidationError(f"modules.{k}: unknown algebra {v['self']!r}")
            continue
        if not v["generators"]:
            raise ValidationError(f"modules.{k}: needs at least one generator")
        shapes = {g.shape for g in v["generators"]}
        if len(shapes) != 1 or next(iter(shapes))[1] != n:
            raise ValidationError(f"modules.{k}: generators must share a shape (k, {n})")
    for k, v in s.states.items():
        ref, table = ("algebra", s.algebras) if "algebra" in v else ("module", s.modules)
        if v[ref] not in table:
            raise ValidationError(f"states.{k}: unknown {ref} {v[ref]!r}")
        if v["witness"].shape != (n, n):
            raise ValidationError(f"states.{k}.witness: shape {v['witness'].shape}, expected {(n, n)}")
    tables = {"algebras": s.algebras, "modules": s.modules, "states": s.states, "elements": s.elements}
    for i, c in enumerate(s.checks):
        if c.op not in OPERATIONS:
            raise ValidationError(f"checks[{i}]: unknown operation {c.op!r}; valid: {', '.join(sorted(OPERATIONS))}")
        op = OPERATIONS[c.op]
        for arg, namespace in op.refs.items():
            if arg not in c.args:
                raise ValidationError(f"checks[{i}] ({c.op}): missing argument {arg!r}")
            if c.args[arg] not in tables[namespace]:
                raise ValidationError(f"checks[{i}] ({c.op}): {arg}={c.args[arg]!r} is not in {namespace}")
        extra = set(c.args) - set(op.refs)
        if extra:
            raise ValidationError(f"checks[{i}] ({c.op}): unexpected arguments {sorted(extra)}")
        seed = c.params.get("seed", s.config.get("seed", RunConfig().seed))
        if op.stochastic and not isinstance(seed, int):
            raise ValidationError(f"checks[{i}] ({c.op}): stochastic check needs an integer seed")
    for i, e in enumerate(s.expectations):
        if not 0 <= e.check < len(s.checks):
            raise ValidationError(f"expectations[{i}]: check index {e.check} out of range")
        if e.equals is None and e.value is None and e.min is None and e.max is None and e.one_of is None:
            raise ValidationError(f"expectations[{i}]: nothing to compare")


# -- running -----------------------------------------------------------------


@dataclass
class CheckResult:
    index: int
    op: str
    result: dict | None
    error: str | None
    seconds: float
    expectations: list = field(default_factory=list)


@dataclass
class RunReport:
    name: str
    config: dict
    checks: list
    version: str = __version__
    notes: list = field(default_factory=list)

    @property
    def expectations_met(self) -> bool:
        return all(e["passed"] for c in self.checks for e in c.expectations)

    @property
    def errors(self) -> list:
        return [c for c in self.checks if c.error is not None]

    @property
    def exit_code(self) -> int:
        if self.errors:
            return 4
        return 0 if self.expectations_met else 2

    def to_json(self, timings: bool = True) -> dict:
        checks = []
        for c in self.checks:
            row = {"index": c.index, "op": c.op, "result": c.result, "error": c.error,
                   "expectations": c.expectations}
            if timings:
                row["seconds"] = c.seconds
            checks.append(row)
        return {"scenario": self.name, "version": self.version, "config": self.config, "notes": self.notes,
                "checks": checks, "expectations_met": self.expectations_met}

    def dumps(self, timings: bool = True) -> str:
        return json.dumps(self.to_json(timings), indent=1, sort_keys=True) + "\n"


def lookup(result, path: str):
    """Follow a dotted path (``witness.gap``, ``window.0``) into a JSON result."""
    node = result
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node[part]
        else:
            raise KeyError(path)
    return node


def _close(actual, expected, tol) -> bool:
    if isinstance(expected, list):
        return isinstance(actual, list) and len(actual) == len(expected) and all(
            _close(a, b, tol) for a, b in zip(actual, expected))
    try:
        return abs(float(actual) - float(expected)) <= tol
    except (TypeError, ValueError):
        return False


def evaluate(e: Expectation, result) -> dict:
    out = {"path": e.path, "passed": False, "actual": None}
    try:
        actual = lookup(result, e.path)
    except (KeyError, IndexError, ValueError, TypeError):
        out["reason"] = "path not found"
        return out
    out["actual"] = actual
    ok = True
    if e.equals is not None:
        ok &= actual == e.equals
    if e.value is not None:
        ok &= _close(actual, e.value, e.tol)
    if e.min is not None:
        ok &= isinstance(actual, (int, float)) and actual >= e.min
    if e.max is not None:
        ok &= isinstance(actual, (int, float)) and actual <= e.max
    if e.one_of is not None:
        ok &= actual in e.one_of
    out["passed"] = bool(ok)
    return out


def run(s: Scenario, base: RunConfig | None = None, overrides: dict | None = None) -> RunReport:
    """Execute the checks in order; a failing check is recorded and the run continues."""
    config = s.run_config(base or load_default_config()).replace(**(overrides or {}))
    ctx = _Context(s)
    results = []
    for i, c in enumerate(s.checks):
        op = OPERATIONS[c.op]
        params = dict(c.params)
        check_config = config.replace(**{k: params.pop(k) for k in CONFIG_KEYS if k in params})
        start = time.perf_counter()
        try:
            args = {a: ctx.resolve(ns, c.args[a]) for a, ns in op.refs.items()}
            result, error = _jsonable(op.func(config=check_config, **args, **params)), None
        except Exception as exc:  # recorded per check; the run continues
            err = exc if isinstance(exc, CheckError) else CheckError(f"{type(exc).__name__}: {exc}")
            result, error = None, str(err)
        results.append(CheckResult(i, c.op, result, error, time.perf_counter() - start))
    for e in s.expectations:
        target = results[e.check]
        verdict = evaluate(e, target.result) if target.result is not None else {
            "path": e.path, "passed": False, "actual": None, "reason": "check failed"}
        target.expectations.append(verdict)
    return RunReport(s.name, config.to_dict(), results, notes=list(s.notes))


def run_scenario(path_or_name, base: RunConfig | None = None, overrides: dict | None = None) -> RunReport:
    """Run a built-in by name or a scenario file by path."""
    if isinstance(path_or_name, Scenario):
        return run(path_or_name, base, overrides)
    key = str(path_or_name)
    if key in BUILTINS:
        return run(builtin(key), base, overrides)
    if Path(key).suffix == ".json" or Path(key).exists():
        return run(load(key), base, overrides)
    raise UnknownScenario(key, BUILTINS)


# -- built-in scenarios ------------------------------------------------------


def _basis(n, k) -> np.ndarray:
    e = np.zeros((n, n))
    e[k, k] = 1.0
    return e


def _t_projection(t: float) -> np.ndarray:
    """Rank-two projection onto span(e1, cos(pi t/2) e2 + sin(pi t/2) e3) in M4."""
    c, s = math.cos(math.pi * t / 2), math.sin(math.pi * t / 2)
    p = np.zeros((4, 4))
    p[0, 0] = 1.0
    p[1, 1], p[1, 2], p[2, 1], p[2, 2] = c * c, s * c, s * c, s * s
    return p


def corners() -> Scenario:
    p1, p2 = _basis(2, 0), _basis(2, 1)
    s = Scenario("ex-2.4-corners", 2, "Corner algebras p1 M2 p1 and p2 M2 p2: no common extension, "
                 "scalar restrictions at m = 1/2", config={"seed": 42})
    s.algebras = {"A1": {"generators": [p1]}, "A2": {"generators": [p2]}}
    s.modules = {"E1": {"self": "A1"}, "E2": {"self": "A2"}}
    s.states = {"phi1": {"algebra": "A1", "witness": p1}, "phi2": {"algebra": "A2", "witness": p2}}
    refs = {"a1": "A1", "phi1": "phi1", "a2": "A2", "phi2": "phi2"}
    s.checks = [Check("cstar_extension", refs),
                Check("scalar_restriction", refs, {"m": 0.5}),
                Check("module_independence", {"e1": "E1", "e2": "E2"}, {"m": 0.5}),
                Check("cstar_independence", {"a1": "A1", "a2": "A2"}),
                Check("norm_multiplicativity", {"a1": "A1", "a2": "A2"})]
    s.expectations = [Expectation(0, "status", equals="Infeasible"),
                      Expectation(0, "exact_contradiction", equals=True),
                      Expectation(1, "status", equals="Feasible"),
                      Expectation(1, "scales.c1", value=0.5, tol=1e-8),
                      Expectation(1, "scales.c2", value=0.5, tol=1e-8),
                      Expectation(2, "kind", equals="ModuleIndependent"),
                      Expectation(2, "window", value=[0.5, 1.0], tol=1e-8),
                      Expectation(3, "kind", equals="NotIndependent"),
                      Expectation(4, "status", equals="violated")]
    return s


def orthogonal_columns(n: int = 3) -> Scenario:
    e = np.eye(n)
    s = Scenario("ex-2.7-orthogonal", 1, f"A line K and its orthogonal complement in C^{n} (column vectors): "
                 "independent with m = M = 1 although <x, y> = 0", config={"seed": 42})
    s.modules = {"K": {"generators": [e[:, [0]]]}, "Kperp": {"generators": [e[:, [k]] for k in range(1, n)]}}
    s.elements = {"x": e[:, [0]], "y": e[:, [1]]}
    s.checks = [Check("module_independence", {"e1": "K", "e2": "Kperp"}, {"m": 0.5}),
                Check("inner_norms", {"x": "x", "y": "y"})]
    s.expectations = [Expectation(0, "kind", equals="ModuleIndependent"),
                      Expectation(0, "window", value=[1.0, 1.0], tol=1e-8),
                      Expectation(1, "inner_norm", value=0.0, tol=1e-12),
                      Expectation(1, "norm_product", value=1.0, tol=1e-12)]
    return s


def weight_profile(n: int = 16, level: float = 0.75) -> np.ndarray:
    """A nonconstant weight g >= 1/2 with mean one: a constant floor plus one bump."""
    if n < 2 or not 0.5 <= level < 1.0:
        raise ValueError("need n >= 2 and 1/2 <= level < 1")
    g = np.full(n, level)
    g[n // 2] += n * (1.0 - level)
    return g


def weights(n: int = 16, level: float = 0.75) -> Scenario:
    g = weight_profile(n, level)
    M = float(np.sqrt(np.mean(g * g)))
    s = Scenario("ex-2.10-weights", n, f"Weighted state on a diagonal algebra of {n} points "
                 "(desk-scale analogue of C[0,1]); window (1/2, ||g||_2)", config={"seed": 42})
    s.notes = [f"desk-scale analogue: {n}-point discretization with weight floor {level:g}",
               "the diagonal algebra is not independent of itself; both routes must say so"]
    s.algebras = {"D": {"generators": [_basis(n, k) for k in range(n)]}}
    s.modules = {"E": {"self": "D"}}
    s.states = {"uniform": {"module": "E", "witness": np.eye(n) / n}}
    s.elements = {"weighted": np.diag(g / n), "one": np.eye(n)}
    s.checks = [Check("window_probe", {"module": "E", "psi": "uniform", "ambient": "weighted"},
                      {"m": 0.5, "M": M, "slack_tol": 1e-10}),
                Check("module_independence", {"e1": "E", "e2": "E"}),
                Check("ffss", {"e1": "E", "e2": "E", "anchor": "one"})]
    s.expectations = [Expectation(0, "passes", equals=True),
                      Expectation(1, "kind", equals="NotIndependent"),
                      Expectation(2, "kind", equals="NotIndependent")]
    return s


def vector_module() -> Scenario:
    e = np.eye(2)
    s = Scenario("ex-2.13-vector-module", 2, "Lines C e1, C e2 of the vector module of M2: "
                 "module independent with window (1/2, 1)", config={"seed": 42})
    s.notes = ["row carrier: a vector h is the row h*, so <h1*, h2*> = h1 h2*",
               "inner products of e1, e2 as Hilbert space vectors are checked on columns"]
    s.modules = {"H1": {"generators": [e[[0], :]]}, "H2": {"generators": [e[[1], :]]}}
    s.states = {"w1": {"module": "H1", "witness": _basis(2, 0)}, "w2": {"module": "H2", "witness": _basis(2, 1)}}
    s.elements = {"half": np.eye(2) / 2, "e1": e[:, [0]], "e2": e[:, [1]]}
    s.checks = [Check("module_independence", {"e1": "H1", "e2": "H2"}, {"m": 0.5}),
                Check("window_probe", {"module": "H1", "psi": "w1", "ambient": "half"}, {"m": 0.5, "M": 1.0}),
                Check("window_probe", {"module": "H2", "psi": "w2", "ambient": "half"}, {"m": 0.5, "M": 1.0}),
                Check("inner_norms", {"x": "e1", "y": "e2"})]
    s.expectations = [Expectation(0, "kind", equals="ModuleIndependent"),
                      Expectation(0, "window", value=[0.5, 1.0], tol=1e-8),
                      Expectation(1, "passes", equals=True),
                      Expectation(2, "passes", equals=True),
                      Expectation(3, "inner_norm", value=0.0, tol=1e-12),
                      Expectation(3, "norm_product", value=1.0, tol=1e-12)]
    return s


def qep_projection() -> Scenario:
    p = _basis(2, 0)
    s = Scenario("ex-2.15-qep", 2, "K = C p in M2: independent of itself, but <K, K> has no quasi extension "
                 "property and |p| != 1", config={"seed": 42})
    s.algebras = {"Cp": {"generators": [p]}}
    s.modules = {"K": {"self": "Cp"}}
    s.checks = [Check("intersection_screen", {"e1": "K", "e2": "K"}),
                Check("qep", {"algebra": "Cp"}),
                Check("module_independence", {"e1": "K", "e2": "K"})]
    s.expectations = [Expectation(0, "screen", equals="pass"),
                      Expectation(0, "z", value=matrix_to_json(p), tol=1e-10),
                      Expectation(1, "status", equals="violated"),
                      Expectation(1, "residual", max=1e-10),
                      Expectation(2, "kind", equals="ModuleIndependent")]
    return s


def random_partial_isometry(rng: np.random.Generator, n: int, rank: int) -> np.ndarray:
    U, V = random_unitary(rng, n), random_unitary(rng, n)
    return U[:, :rank] @ V[:, :rank].conj().T


def partial_isometries(seed: int = 42, n: int | None = None) -> Scenario:
    """Two random partial isometries u, v and the averaged state of their initial projections."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(4, 7))
    u = random_partial_isometry(rng, n, int(rng.integers(1, n)))
    v = random_partial_isometry(rng, n, int(rng.integers(1, n)))
    p, q = u.conj().T @ u, v.conj().T @ v
    rp, rq = round(np.trace(p).real), round(np.trace(q).real)
    phi = 0.5 * (p / rp + q / rq)
    s = Scenario("prop-5.1-partial-isometries", n, f"One-dimensional self-modules C u, C v in M{n} "
                 f"(seed {seed}): the averaged state gives window (1/2, 1)", config={"seed": seed})
    s.modules = {"U": {"generators": [u]}, "V": {"generators": [v]}}
    s.states = {"psi_u": {"module": "U", "witness": p / rp}, "psi_v": {"module": "V", "witness": q / rq}}
    s.elements = {"phi": phi, "u": u, "v": v}
    s.checks = [Check("module_summary", {"module": "U"}),
                Check("module_summary", {"module": "V"}),
                Check("window_probe", {"module": "U", "psi": "psi_u", "ambient": "phi"},
                      {"m": 0.5, "M": 1.0, "slack_tol": 1e-8}),
                Check("window_probe", {"module": "V", "psi": "psi_v", "ambient": "phi"},
                      {"m": 0.5, "M": 1.0, "slack_tol": 1e-8}),
                Check("module_independence", {"e1": "U", "e2": "V"}, {"m": 0.5})]
    s.expectations = [Expectation(0, "dim", equals=1), Expectation(0, "inner_dim", equals=1),
                      Expectation(1, "dim", equals=1), Expectation(1, "inner_dim", equals=1),
                      Expectation(2, "passes", equals=True), Expectation(3, "passes", equals=True),
                      Expectation(4, "kind", equals="ModuleIndependent")]
    return s


def _t_state(p, weight) -> np.ndarray:
    """Witness of the state with value ``weight`` on p and 1 - weight on 1 - p."""
    q = np.eye(4) - p
    return weight * p / np.trace(p) + (1.0 - weight) * q / np.trace(q)


def _add_t_point(s: Scenario, t: float, tag: str, restarts: int | None = None) -> None:
    """Checks for the pair (A_0, A_t): verdict, the (1, 0) state pair, and the deformation route."""
    p0, pt = _t_projection(0.0), _t_projection(t)
    if "A0" not in s.algebras:
        s.algebras["A0"] = {"generators": [p0, np.eye(4) - p0]}
        s.modules["E0"] = {"self": "A0"}
        s.states["alpha1"] = {"algebra": "A0", "witness": _t_state(p0, 1.0)}
        s.elements["one"] = np.eye(4)
    s.algebras[f"A{tag}"] = {"generators": [pt, np.eye(4) - pt]}
    s.modules[f"E{tag}"] = {"self": f"A{tag}"}
    s.states[f"beta0_{tag}"] = {"algebra": f"A{tag}", "witness": _t_state(pt, 0.0)}
    independent = t >= 1.0
    k = len(s.checks)
    ffss_params = {} if restarts is None else {"restarts": restarts}
    s.checks += [Check("module_independence", {"e1": "E0", "e2": f"E{tag}"}, {"m": 0.5}),
                 Check("scalar_restriction", {"a1": "A0", "phi1": "alpha1", "a2": f"A{tag}",
                                              "phi2": f"beta0_{tag}"}, {"m": 0.5}),
                 Check("ffss", {"e1": "E0", "e2": f"E{tag}", "anchor": "one"}, ffss_params)]
    kind = "ModuleIndependent" if independent else "NotIndependent"
    s.expectations += [Expectation(k, "kind", equals=kind),
                       Expectation(k + 1, "status", equals="Feasible" if independent else "Infeasible"),
                       Expectation(k + 2, "kind", equals=kind)]
    if independent:
        s.expectations.append(Expectation(k, "window", value=[1.0, 1.0], tol=1e-8))
    else:
        s.expectations.append(Expectation(k + 1, "gap", min=1e-3))


def t_family(t: float) -> Scenario:
    s = Scenario("ex-5.2", 4, f"Commutative algebras A_0, A_t in M4 at t = {t:g}", config={"seed": 42})
    _add_t_point(s, t, "t")
    return s


def t_sweep(grid=None) -> Scenario:
    grid = list(np.linspace(0.0, 1.0, 11) if grid is None else grid)
    s = Scenario("ex-5.2-sweep", 4, f"A_0 against A_t for {len(grid)} values of t in [0, 1]: "
                 "independent only at t = 1", config={"seed": 42})
    for i, t in enumerate(grid):
        _add_t_point(s, float(t), str(i), restarts=16)
    s.notes = [f"t grid: {[round(float(t), 12) for t in grid]}"]
    return s


def constant_family(t: float) -> Scenario:
    """Ignores t; every grid point is the corner-algebra example."""
    return corners()


BUILTINS = {
    "ex-2.4-corners": corners,
    "ex-2.7-orthogonal": orthogonal_columns,
    "ex-2.10-weights": weights,
    "ex-2.13-vector-module": vector_module,
    "ex-2.15-qep": qep_projection,
    "prop-5.1-partial-isometries": partial_isometries,
    "ex-5.2-sweep": t_sweep,
}

FAMILIES = {"ex-5.2": t_family, "constant": constant_family}


def builtin(name: str, **options) -> Scenario:
    if name not in BUILTINS:
        raise UnknownScenario(name, BUILTINS)
    return BUILTINS[name](**options)


def list_scenarios() -> list:
    return [(name, factory().summary) for name, factory in BUILTINS.items()]


# -- sweeps ------------------------------------------------------------------


def parse_grid(spec: str) -> list:
    """``a:b:n`` -> n evenly spaced points from a to b."""
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ValidationError(f"grid must look like a:b:n, got {spec!r}") from exc
    if n < 1:
        raise ValidationError("grid needs at least one point")
    return [a] if n == 1 else [float(x) for x in np.linspace(a, b, n)]


def sweep_row(t: float, report: RunReport) -> dict:
    """Verdict, window and infeasibility gap (or the refuting state pair) of one grid point."""
    row = {"t": t, "verdict": None, "window": None, "gap": None, "witness": None, "error": None}
    for c in report.checks:
        if c.error is not None:
            row["error"] = row["error"] or c.error
            continue
        res = c.result
        if row["verdict"] is None and "kind" in res:
            row["verdict"], row["window"] = res["kind"], res["window"]
            if res.get("witness"):
                row["witness"] = res["witness"].get("pair") or res["witness"].get("kind")
        elif row["gap"] is None and res.get("gap") is not None:
            row["gap"] = res["gap"]
    return row


def sweep(family: str, grid, base: RunConfig | None = None, overrides: dict | None = None) -> list:
    if family not in FAMILIES:
        raise UnknownScenario(family, FAMILIES)
    rows = []
    for t in grid:
        try:
            rows.append(sweep_row(float(t), run(FAMILIES[family](float(t)), base, overrides)))
        except ModIndepError as exc:
            rows.append({"t": float(t), "verdict": None, "window": None, "gap": None, "witness": None,
                         "error": str(exc)})
    return rows


def format_table(rows: list) -> str:
    def fmt_window(w):
        return "-" if w is None else f"({w[0]:.4g}, {w[1]:.4g})"

    def fmt_gap(r):
        if r["error"]:
            return f"error: {r['error']}"
        if r["gap"] is not None:
            return f"{r['gap']:.4e}"
        return "-" if r["witness"] is None else str(r["witness"])

    cells = [("t", "verdict", "window", "gap-or-witness")]
    cells += [(f"{r['t']:.4g}", r["verdict"] or "-", fmt_window(r["window"]), fmt_gap(r)) for r in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def plot_gaps(rows: list, path) -> None:
    """Line plot of the infeasibility gap against t (rows without a gap are skipped)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "modindep"  # stable element ids

    pts = [(r["t"], r["gap"]) for r in rows if r["gap"] is not None]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if pts:
        ts, gaps = zip(*pts)
        ax.plot(ts, gaps, marker="o")
    ax.set_xlabel("t")
    ax.set_ylabel("infeasibility gap")
    ax.set_yscale("log" if pts and min(g for _, g in pts) > 0 else "linear")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
