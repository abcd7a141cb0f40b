"""Segmented (cycled) evolution and the estimators built from measured counts."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .linalg import IDENTITY, KET_0, as_state, expm2, norm2, population
from .sensor import LAMBDA_UNIT, SensorConfig, susceptibility_analytic

log = logging.getLogger(__name__)

DEFAULT_SEGMENTS = 5


@dataclass(frozen=True)
class SegmentPlan:
    tau: float
    n_segments: int
    config: SensorConfig

    def __post_init__(self):
        if int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise ValueError("n_segments must be a positive integer")
        if not math.isfinite(self.tau) or self.tau < 0:
            raise ValueError("tau must be finite and nonnegative")

    @property
    def total_time(self) -> float:
        return self.n_segments * self.tau

    @classmethod
    def over(cls, config: SensorConfig, total_time: float | None = None, n_segments: int = DEFAULT_SEGMENTS):
        """Split ``total_time`` (default: the config's default time) into equal segments."""
        if total_time is None:
            total_time = config.default_time()
        return cls(tau=total_time / n_segments, n_segments=n_segments, config=config)


@dataclass(frozen=True)
class CountRecord:
    n_h: int
    n_v: int

    def __post_init__(self):
        if self.n_h < 0 or self.n_v < 0:
            raise ValueError("photon counts must be nonnegative")


@dataclass
class LambdaSweep:
    lam: np.ndarray
    population: np.ndarray
    chi: np.ndarray  # forward differences, one shorter than ``lam``


def energy_shift(config: SensorConfig) -> complex:
    """Constant removed from each segment's generator (``E`` for the bare sensor)."""
    return config.energy if config.kind == "bare" else 0j


def segment_operator(plan: SegmentPlan, lam: float | None = None) -> np.ndarray:
    """``u(tau) = exp(-i (H - E I) tau)`` by direct exponentiation."""
    cfg = plan.config
    if cfg.kind == "bare" and abs(cfg.a - 1) > 1e-12:
        log.debug("a = %s: segment operator has no pseudo-Hermitian closed form, using generic path", cfg.a)
    generator = cfg.hamiltonian(lam) - energy_shift(cfg) * IDENTITY
    return expm2(generator, -1j * plan.tau)


def stroboscopic_evolve(plan: SegmentPlan, initial=KET_0, lam: float | None = None) -> np.ndarray:
    """Apply ``u(tau)`` ``n_segments`` times to ``initial``."""
    psi = as_state(initial)
    u = segment_operator(plan, lam)
    for _ in range(plan.n_segments):
        psi = u @ psi
    return as_state(psi)


def success_probability(plan: SegmentPlan, lam: float | None = None, initial=KET_0) -> float:
    """Surviving fraction ``|psi(t)|^2 / |psi(0)|^2`` clamped to ``(0, 1]``."""
    final = stroboscopic_evolve(plan, initial, lam)
    return min(1.0, norm2(final) / norm2(initial))


def population_from_counts(rec: CountRecord) -> float:
    total = rec.n_h + rec.n_v
    if total < 1:
        raise ValueError("empty count record")
    return rec.n_h / total


def discrete_susceptibility(lambdas: Sequence[float], populations: Sequence[float]) -> np.ndarray:
    """Forward differences ``(S[i+1] - S[i]) / (lam[i+1] - lam[i])``."""
    lam = np.asarray(lambdas, dtype=float)
    s = np.asarray(populations, dtype=float)
    if lam.shape != s.shape or lam.ndim != 1:
        raise ValueError("lambdas and populations must be 1-d and of equal length")
    if lam.size < 2:
        raise ValueError("need at least two points")
    if np.any(np.diff(lam) <= 0):
        raise ValueError("lambda grid must be strictly increasing")
    return np.diff(s) / np.diff(lam)


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def sweep_lambda(plan: SegmentPlan, lambda_grid, initial=KET_0) -> LambdaSweep:
    """Population of ``|H>`` after the segmented evolution at each ``lam``."""
    grid = check_grid(lambda_grid)
    pops = np.array([population(stroboscopic_evolve(plan, initial, lam)) for lam in grid])
    chi = discrete_susceptibility(grid, pops) if grid.size > 1 else np.empty(0)
    return LambdaSweep(lam=grid, population=pops, chi=chi)


def locate_working_point(
    population_fn: Callable[[float], float],
    grid,
    step: float = LAMBDA_UNIT / 100,
    xatol: float = 1e-6 * LAMBDA_UNIT,
) -> tuple[float, float]:
    """Return ``(x*, |chi|max)`` maximizing the central-difference susceptibility.

    A coarse scan over ``grid`` brackets the peak, then a bounded Brent search
    (golden section with parabolic steps) refines it to ``xatol``.
    """
    grid = check_grid(grid)
    chi = np.array([abs(susceptibility_analytic(population_fn, x, step)) for x in grid])
    i = int(np.argmax(chi))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi <= lo:
        return float(grid[i]), float(chi[i])
    res = minimize_scalar(
        lambda x: -abs(susceptibility_analytic(population_fn, x, step)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xatol},
    )
    if -res.fun < chi[i]:
        return float(grid[i]), float(chi[i])
    return float(res.x), float(-res.fun)


def response_window(lam, pops) -> tuple[float, float]:
    """Interval over which the population swings through its dip.

    Starting at the population minimum, walk outward on each side while the
    population keeps rising; the stopping points (or the sweep ends) bound
    the window.
    """
    lam = np.asarray(lam, dtype=float)
    s = np.asarray(pops, dtype=float)
    i = int(np.argmin(s))
    lo = i
    while lo > 0 and s[lo - 1] >= s[lo]:
        lo -= 1
    hi = i
    while hi < s.size - 1 and s[hi + 1] >= s[hi]:
        hi += 1
    return float(lam[lo]), float(lam[hi])
