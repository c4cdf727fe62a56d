"""Run configuration: JSON file -> validated dataclasses.

Unknown keys anywhere are errors so that a sweep file means exactly one thing.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .deformation import DeformationSpec
from .errors import ConfigInvalid

TASKS = ("ops", "spectrum", "kernel", "resolve", "density", "projector",
         "quantize", "optics", "su11", "evolve")
TASK_ALIASES = {"mandel": "optics"}


@dataclass(frozen=True)
class DeformationConfig:
    kind: str = "identity"
    n_max: int = 256          # ignored for tabulated (the table length is used)
    q: float | None = None
    values: list | None = None

    def build(self) -> DeformationSpec:
        if self.kind == "identity":
            return DeformationSpec.identity(self.n_max)
        if self.kind == "q_deformed":
            return DeformationSpec.q_deformed(self.q, self.n_max)
        return DeformationSpec.tabulated(self.values)


@dataclass(frozen=True)
class ModesConfig:
    n_b: int = 1
    omega: list = field(default_factory=lambda: [1.0])
    M: int = 1
    eps: list = field(default_factory=lambda: [0.0])
    g: list = field(default_factory=lambda: [0.0])
    k: object = "all"

    def configs(self) -> list[tuple]:
        from .fock_ops import gamma_configs

        if self.k == "all":
            return gamma_configs(self.M)
        return [tuple(c) for c in self.k]


@dataclass(frozen=True)
class GridConfig:
    radial: int = 3
    angular: int = 4
    radius_fraction: float = 0.8
    max_abs_z: float = 2.0
    abs_z_squared: list | None = None


@dataclass(frozen=True)
class Tolerances:
    series_tail: float = 1e-10
    cross_check: float = 1e-8
    idempotence: float = 1e-6
    expectation: float = 1e-10


@dataclass(frozen=True)
class EvolutionConfig:
    times: list = field(default_factory=lambda: [0.0, 1.0, 2 * math.pi])


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    deformation: DeformationConfig = field(default_factory=DeformationConfig)
    truncation: int = 32
    modes: ModesConfig = field(default_factory=ModesConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    quadrature_order: int = 16
    tolerances: Tolerances = field(default_factory=Tolerances)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    tasks: list = field(default_factory=list)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def task_names(self) -> list[str]:
        return [TASK_ALIASES.get(t, t) for t in self.tasks]


_NESTED = {
    "deformation": DeformationConfig,
    "modes": ModesConfig,
    "grid": GridConfig,
    "tolerances": Tolerances,
    "evolution": EvolutionConfig,
    "output": OutputConfig,
}


def _build(cls, raw, where: str):
    if not isinstance(raw, dict):
        raise ConfigInvalid(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, val in raw.items():
        if cls is RunConfig and key in _NESTED:
            val = _build(_NESTED[key], val, key)
        kwargs[key] = val
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigInvalid(f"{where}: {exc}") from exc


def _positive_int(value, name, minimum=1):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigInvalid(f"{name} must be an integer >= {minimum}")


def _real(value, name):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ConfigInvalid(f"{name} must be a finite number")


def validate(cfg: RunConfig) -> RunConfig:
    d = cfg.deformation
    if d.kind not in ("identity", "q_deformed", "tabulated"):
        raise ConfigInvalid(f"deformation.kind {d.kind!r} is not identity, q_deformed or tabulated")
    if d.kind != "tabulated":
        _positive_int(d.n_max, "deformation.n_max", 16)
    if d.kind == "q_deformed":
        _real(d.q, "deformation.q")
        if not 0 < d.q < 1:
            raise ConfigInvalid("deformation.q must lie in (0, 1)")
    if d.kind == "tabulated":
        if not isinstance(d.values, list) or len(d.values) < 16:
            raise ConfigInvalid("deformation.values must list at least 16 values")
        for v in d.values:
            _real(v, "deformation.values")
            if v <= 0:
                raise ConfigInvalid("deformation.values must be positive")
    elif d.values is not None:
        raise ConfigInvalid("deformation.values only applies to kind 'tabulated'")

    _positive_int(cfg.truncation, "truncation", 4)
    spec_n = len(d.values) if d.kind == "tabulated" and d.values else d.n_max
    if cfg.truncation > spec_n:
        raise ConfigInvalid(f"truncation {cfg.truncation} exceeds the deformation table ({spec_n})")
    _positive_int(cfg.quadrature_order, "quadrature_order")
    if 2 * cfg.quadrature_order > spec_n:
        raise ConfigInvalid("2 x quadrature_order exceeds the deformation table")

    m = cfg.modes
    _positive_int(m.n_b, "modes.n_b")
    _positive_int(m.M, "modes.M")
    if m.n_b > 3 or m.M > 4:
        raise ConfigInvalid("desk-scale caps: modes.n_b <= 3, modes.M <= 4")
    for name, seq, size in (("omega", m.omega, m.n_b), ("eps", m.eps, m.M), ("g", m.g, m.M)):
        if not isinstance(seq, list) or len(seq) != size:
            raise ConfigInvalid(f"modes.{name} must be a list of length {size}")
        for v in seq:
            _real(v, f"modes.{name}")
    if any(w <= 0 for w in m.omega):
        raise ConfigInvalid("modes.omega must be positive")
    if m.k != "all":
        if not isinstance(m.k, list) or not m.k:
            raise ConfigInvalid("modes.k must be 'all' or a non-empty list of bit vectors")
        for cfg_k in m.k:
            if not isinstance(cfg_k, list) or len(cfg_k) != m.M or any(b not in (0, 1) for b in cfg_k):
                raise ConfigInvalid(f"modes.k entry {cfg_k!r} is not a length-{m.M} bit vector")

    g = cfg.grid
    _positive_int(g.radial, "grid.radial")
    _positive_int(g.angular, "grid.angular")
    _real(g.radius_fraction, "grid.radius_fraction")
    if not 0 < g.radius_fraction <= 0.95:
        raise ConfigInvalid("grid.radius_fraction must lie in (0, 0.95]")
    _real(g.max_abs_z, "grid.max_abs_z")
    if g.max_abs_z <= 0:
        raise ConfigInvalid("grid.max_abs_z must be positive")
    if g.abs_z_squared is not None:
        if not isinstance(g.abs_z_squared, list):
            raise ConfigInvalid("grid.abs_z_squared must be a list")
        for v in g.abs_z_squared:
            _real(v, "grid.abs_z_squared")
            if v < 0:
                raise ConfigInvalid("grid.abs_z_squared entries must be >= 0")

    for f in fields(Tolerances):
        v = getattr(cfg.tolerances, f.name)
        _real(v, f"tolerances.{f.name}")
        if v <= 0:
            raise ConfigInvalid(f"tolerances.{f.name} must be positive")

    if not isinstance(cfg.evolution.times, list):
        raise ConfigInvalid("evolution.times must be a list")
    for t in cfg.evolution.times:
        _real(t, "evolution.times")

    if not isinstance(cfg.tasks, list):
        raise ConfigInvalid("tasks must be a list")
    for t in cfg.tasks:
        if TASK_ALIASES.get(t, t) not in TASKS:
            raise ConfigInvalid(f"unknown task {t!r}; supported: {', '.join(TASKS)}")
    if cfg.output.format != "csv":
        raise ConfigInvalid("output.format must be 'csv'")
    if cfg.output.path is not None and not isinstance(cfg.output.path, str):
        raise ConfigInvalid("output.path must be a string")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    return validate(_build(RunConfig, raw, "config"))
