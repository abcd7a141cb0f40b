"""Experiment configuration: nested dataclasses that round-trip through YAML.

Angles are stored as multiples of pi (``theta_v_pi: 0.43``) and grids carry
their unit: ``eps`` (multiples of the signal unit), ``pi``, ``raw`` or
``log10`` (the grid holds exponents).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, is_dataclass

import numpy as np
import yaml

from .sensor import LAMBDA_UNIT, DEFAULT_DELTA, DEFAULT_ENERGY, SensorConfig
from .stroboscopic import DEFAULT_SEGMENTS, check_grid

SCENARIOS = ("sweep-lambda", "sweep-theta1", "noise-sweep", "fisher-sweep", "decompose", "supplement-configs")
GRID_UNITS = ("eps", "pi", "raw", "log10")


@dataclass
class SensorSection:
    kind: str = "bare"
    delta: float = DEFAULT_DELTA
    a: float = 1.0
    omega: float = 2 * DEFAULT_ENERGY
    gamma: float = 0.0
    c: float = 0.75
    d: float = -0.5

    def build(self) -> SensorConfig:
        return SensorConfig(**asdict(self))


@dataclass
class PlanSection:
    n_segments: int = DEFAULT_SEGMENTS
    total_time: float | None = None  # None: the sensor's default time


@dataclass
class GridSection:
    start: float = -2.0
    stop: float = 2.0
    num: int = 81
    unit: str = "eps"
    values: list[float] | None = None  # explicit points override start/stop/num

    def points(self) -> np.ndarray:
        if self.unit not in GRID_UNITS:
            raise ValueError(f"unknown grid unit {self.unit!r}; expected one of {GRID_UNITS}")
        if self.values is not None:
            raw = np.asarray(self.values, dtype=float)
        else:
            if int(self.num) != self.num or self.num < 1:
                raise ValueError("grid.num must be a positive integer")
            raw = np.linspace(self.start, self.stop, int(self.num))
        scale = {"eps": LAMBDA_UNIT, "pi": math.pi, "raw": 1.0}
        pts = 10.0**raw if self.unit == "log10" else raw * scale[self.unit]
        return check_grid(pts)


@dataclass
class NoiseSection:
    eta_h: float = 0.1
    eta_v: float = 0.1
    eta_v_ratio: float = 1.2  # noise-sweep sets eta_v = ratio * eta_h
    photon_budget_n: int = 10_000
    repetitions: int = 10_000


@dataclass
class OpticsSection:
    phi1_pi: float = 0.5
    phi2_pi: float = -0.5
    theta2_pi: float = 0.03
    theta_h_pi: float = 0.0
    theta_v_pi: float = 0.43
    loss_convention: str = "cos"
    fit_convention: str = "sin"
    n_starts: int = 12


@dataclass
class SupplementSection:
    delta: float = 0.05


@dataclass
class OutputSection:
    out: str | None = None
    svg: str | None = None
    logx: bool = False


DEFAULT_GRIDS = {
    "sweep-lambda": GridSection(-2.0, 2.0, 81, "eps"),
    "sweep-theta1": GridSection(-0.25, 0.25, 501, "pi"),
    "noise-sweep": GridSection(0.01, 0.10, 10, "raw"),
    "fisher-sweep": GridSection(2.0, 7.0, 11, "log10"),
    "decompose": GridSection(-2.0, 2.0, 5, "eps"),
    "supplement-configs": GridSection(-0.2, 0.2, 81, "raw"),
}


@dataclass
class ExperimentConfig:
    scenario: str = "sweep-lambda"
    seed: int = 0
    sensor: SensorSection = field(default_factory=SensorSection)
    plan: PlanSection = field(default_factory=PlanSection)
    grid: GridSection | None = None  # None: the scenario's default grid
    noise: NoiseSection = field(default_factory=NoiseSection)
    optics: OpticsSection = field(default_factory=OpticsSection)
    supplement: SupplementSection = field(default_factory=SupplementSection)
    output: OutputSection = field(default_factory=OutputSection)

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an integer in [0, 2**64)")
        if self.grid is None:
            self.grid = GridSection(**asdict(DEFAULT_GRIDS[self.scenario]))
        self.grid.points()
        self.sensor.build()
        if self.plan.n_segments < 1 or int(self.plan.n_segments) != self.plan.n_segments:
            raise ValueError("plan.n_segments must be a positive integer")
        if self.noise.repetitions < 2:
            raise ValueError("noise.repetitions must be at least 2")
        return self

    def to_dict(self, include_output: bool = False) -> dict:
        data = asdict(self)
        if not include_output:
            data.pop("output")
        return data

    @classmethod
    def from_dict(cls, data: dict | None) -> "ExperimentConfig":
        data = dict(data or {})
        grid = data.get("grid")
        scenario = data.get("scenario", cls.scenario)
        if isinstance(grid, dict) and scenario in DEFAULT_GRIDS:
            # partial grids fill in from the scenario default
            base = asdict(DEFAULT_GRIDS[scenario])
            if "values" not in grid and {"start", "stop", "num"} & set(grid):
                base["values"] = None
            data["grid"] = {**base, **grid}
        return _build(cls, data, "config")

    def dump_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(include_output=True), sort_keys=False)


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ValueError(f"{where} must be a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown key(s) in {where}: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if callable(known[name].default_factory) else known[name].default
        if is_dataclass(default) and value is not None:
            kwargs[name] = _build(type(default), value, f"{where}.{name}")
        elif name == "grid" and value is not None:
            kwargs[name] = _build(GridSection, value, f"{where}.grid")
        else:
            kwargs[name] = value
    return cls(**kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(yaml.safe_load(fh))


def apply_overrides(data: dict, overrides: dict[str, str]) -> dict:
    """Set dotted keys (``sensor.delta``) from string values parsed as YAML scalars."""
    for key, raw in overrides.items():
        node = data
        *parents, leaf = key.split(".")
        for part in parents:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"cannot override {key!r}: {part!r} is not a section")
        node[leaf] = yaml.safe_load(raw)
    return data
