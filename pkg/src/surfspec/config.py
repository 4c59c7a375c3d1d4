"""Dataclass configurations shared by the pipelines and the command line."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass


@dataclass(frozen=True)
class SolverConfig:
    k: int = 8
    seed: int = 0
    cluster_tol: float = 1e-3
    mass: str = "lumped"
    tol: float = 1e-12


@dataclass(frozen=True)
class SurgeryConfig:
    """Resolution of the surgery: rings around each hole and rows along the model piece."""

    n_angular: int = 32
    n_axial_min: int = 16
    n_axial_max: int = 96
    mollify_delta: float = 0.0


@dataclass(frozen=True)
class ScanConfig:
    grid_size: int = 9
    bisect_steps: int = 12
    gap_tol: float = 5e-3
    fraction_threshold: float = 0.5


@dataclass(frozen=True)
class MaximizeConfig:
    max_iter: int = 200
    step0: float = 0.5
    step_floor: float = 1e-6
    backtrack: float = 0.5
    growth: float = 1.5
    cluster_tol: float = 2e-2
    stationarity_tol: float = 1e-4
    k: int = 10
    seed: int = 0
    track_residuals: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; flags override values read from a JSON file."""

    command: str = "spectrum"
    surface: str = "flat-torus:equilateral"
    attach: str | None = None
    eps: tuple = (0.08, 0.04, 0.02)
    h: tuple = (0.15, 0.3, 0.45)
    k: int = 8
    res: int = 30
    tol: float = 1e-3
    seed: int = 0
    out: str = "out"
    jobs: int = 1
    suite: str = "full"
    surgery: SurgeryConfig = field(default_factory=SurgeryConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    maximize: MaximizeConfig = field(default_factory=MaximizeConfig)


def to_dict(cfg) -> dict:
    return json.loads(json.dumps(asdict(cfg)))


def from_dict(cls, data: dict):
    """Build a (possibly nested) config dataclass, rejecting unknown keys."""
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys for {cls.__name__}: {sorted(unknown)}")
    kw = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        if is_dataclass(default) and isinstance(value, dict):
            kw[name] = from_dict(type(default), value)
        elif isinstance(default, tuple) and isinstance(value, list):
            kw[name] = tuple(value)
        else:
            kw[name] = value
    return cls(**kw)


# where results go and how many workers compute them do not change the numbers
_HASH_EXCLUDED = ("out", "jobs")


def config_hash(cfg) -> str:
    data = {k: v for k, v in to_dict(cfg).items() if k not in _HASH_EXCLUDED}
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
