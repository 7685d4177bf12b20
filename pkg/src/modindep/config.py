"""Central numerical tolerances and run defaults."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

CONFIG_ENV_VAR = "MODINDEP_CONFIG"


@dataclass(frozen=True)
class Tolerances:
    # eigenvalue dust below this is clamped to zero in PSD routines
    psd_clamp: float = 1e-10
    # negative eigenvalues beyond this are a hard NotPSD failure
    psd_fail: float = 1e-6
    hermitian: float = 1e-10
    span: float = 1e-9
    kernel_cutoff: float = 1e-8
    positivity: float = 1e-9
    normalization: float = 1e-9
    unit_vector: float = 1e-10


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-8
    max_iter: int = 50000
    restarts: int = 64
    seed: int = 42
    random_probes: int = 100

    def replace(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


TOL = Tolerances()


def load_default_config(path: str | None = None) -> RunConfig:
    """Defaults, overridden by the JSON file named in ``$MODINDEP_CONFIG`` if set."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    config = RunConfig()
    if not path:
        return config
    with open(path) as fh:
        data = json.load(fh)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
    return config.replace(**data)
