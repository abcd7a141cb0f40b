"""Photon counting with background noise, error propagation and Fisher information.

A measurement detects ``N_det ~ Binomial(N, p)`` photons, of which
``N_H ~ Binomial(N_det, s)`` land in ``|H>``. Each detector also records
background counts uniform in ``[0, eta * N_det]``. The estimator is
``S' = (N_H + N'_H) / (N_det + N'_H + N'_V)``.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from .sensor import LAMBDA_UNIT
from .stroboscopic import CountRecord

log = logging.getLogger(__name__)

ETA_V_RATIO = 1.2
NORMAL_GUARD = 25.0  # minimum p N S (1 - S) for the normal approximation
EXACT_MAX_N = 2000
BLOCK = 1024  # repetitions drawn from one keyed stream
FISHER_DENSITIES = ("gaussian", "convolved")


@dataclass(frozen=True)
class NoiseModel:
    eta_h: float = 0.0
    eta_v: float = 0.0
    photon_budget_n: int = 10_000
    success_probability_p: float = 1.0

    def __post_init__(self):
        for name in ("eta_h", "eta_v"):
            eta = getattr(self, name)
            if not 0 <= eta < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {eta}")
        if int(self.photon_budget_n) != self.photon_budget_n or self.photon_budget_n < 1:
            raise ValueError("photon_budget_n must be a positive integer")
        object.__setattr__(self, "photon_budget_n", int(self.photon_budget_n))
        if not 0 < self.success_probability_p <= 1:
            raise ValueError("success_probability_p must lie in (0, 1]")

    @classmethod
    def with_ratio(cls, eta_h: float, ratio: float = ETA_V_RATIO, **kwargs) -> "NoiseModel":
        """Noise with ``eta_v = ratio * eta_h``."""
        return cls(eta_h=eta_h, eta_v=ratio * eta_h, **kwargs)

    @property
    def noiseless(self) -> bool:
        return self.eta_h == 0 and self.eta_v == 0


@dataclass(frozen=True)
class EstimateReport:
    mean_s_prime: float
    std_s_prime: float
    delta_lambda: float
    samples: int


def thread_count() -> int:
    """Worker cap from ``NH_SENSE_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("NH_SENSE_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("NH_SENSE_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def _check_population(s: float) -> float:
    if not 0 <= s <= 1:
        raise ValueError(f"population must lie in [0, 1], got {s}")
    return float(s)


def draw_counts(s_true: float, model: NoiseModel, rng: np.random.Generator, size: int):
    """Vectorized draw of ``size`` noisy count records as ``(n_h, n_v)`` arrays."""
    s_true = _check_population(s_true)
    n_det = rng.binomial(model.photon_budget_n, model.success_probability_p, size)
    n_h = rng.binomial(n_det, s_true)
    n_v = n_det - n_h
    # floor of a uniform real on [0, eta N_det)
    noise_h = np.floor(rng.random(size) * model.eta_h * n_det).astype(np.int64)
    noise_v = np.floor(rng.random(size) * model.eta_v * n_det).astype(np.int64)
    return n_h + noise_h, n_v + noise_v


def sample_counts(s_true: float, model: NoiseModel, rng: np.random.Generator) -> CountRecord:
    n_h, n_v = draw_counts(s_true, model, rng, 1)
    return CountRecord(int(n_h[0]), int(n_v[0]))


def noisy_population_mean(s: float, model: NoiseModel) -> float:
    s = _check_population(s)
    return s + 0.5 * (1 - s) * model.eta_h - 0.5 * s * model.eta_v


def std_s_prime(s: float, model: NoiseModel) -> float:
    """Propagated standard deviation of ``S'`` (shot noise plus the uniform floor)."""
    s = _check_population(s)
    shot = s * (1 - s) / (model.success_probability_p * model.photon_budget_n)
    damp = (1 - 0.5 * (model.eta_h + model.eta_v)) ** 2
    floor = ((1 - s) ** 2 * model.eta_h**2 + s**2 * model.eta_v**2) / 12
    return math.sqrt(damp * shot + floor)


def delta_lambda(s: float, chi_max: float, model: NoiseModel) -> float:
    """Sensitivity ``std(S') / |chi|max``."""
    if not chi_max > 0:
        raise ValueError("chi_max must be positive")
    return std_s_prime(s, model) / chi_max


def _block_populations(s_true, model, seed, sweep_index, block_index, size):
    rng = rng_stream(seed, sweep_index, block_index)
    n_h, n_v = draw_counts(s_true, model, rng, size)
    total = n_h + n_v
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, n_h / np.maximum(total, 1), np.nan)


def sample_populations(
    s_true: float,
    model: NoiseModel,
    repetitions: int,
    seed: int,
    sweep_index: int = 0,
    workers: int | None = None,
) -> np.ndarray:
    """``repetitions`` noisy populations; empty records come back as NaN.

    Repetitions are split into fixed blocks with one keyed stream each, so the
    result does not depend on ``workers``.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    sizes = [min(BLOCK, repetitions - start) for start in range(0, repetitions, BLOCK)]
    jobs = [(s_true, model, seed, sweep_index, i, n) for i, n in enumerate(sizes)]
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(jobs) == 1:
        parts = [_block_populations(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _block_populations(*job), jobs))
    return np.concatenate(parts)


def estimate(
    s_true: float,
    chi_max: float,
    model: NoiseModel,
    repetitions: int,
    seed: int,
    sweep_index: int = 0,
    workers: int | None = None,
) -> EstimateReport:
    """Monte Carlo mean and spread of ``S'`` and the implied ``delta lambda``."""
    if not chi_max > 0:
        raise ValueError("chi_max must be positive")
    pops = sample_populations(s_true, model, repetitions, seed, sweep_index, workers)
    pops = pops[np.isfinite(pops)]
    if pops.size < 2:
        raise ValueError("fewer than two non-empty measurements")
    std = float(np.std(pops, ddof=1))
    return EstimateReport(
        mean_s_prime=float(np.mean(pops)), std_s_prime=std, delta_lambda=std / chi_max, samples=int(pops.size)
    )


# Fisher information ------------------------------------------------------


def _gaussian_pdf(x, s, model):
    return stats.norm.pdf(x, noisy_population_mean(s, model), std_s_prime(s, model))


def _ramp(z):
    # second antiderivative of the standard normal density
    return z * stats.norm.cdf(z) + stats.norm.pdf(z)


def _convolved_pdf(x, s, model):
    """Normal shot noise convolved with ``(1-s) eta_h U - s eta_v U``, U uniform on [0, 1]."""
    sigma = (1 - 0.5 * (model.eta_h + model.eta_v)) * math.sqrt(
        s * (1 - s) / (model.success_probability_p * model.photon_budget_n)
    )
    a, b = (1 - s) * model.eta_h, s * model.eta_v
    y = np.asarray(x, dtype=float) - s
    if sigma == 0:
        raise ValueError("convolved density needs a nonzero shot-noise width")
    if a < 1e-14 and b < 1e-14:
        return stats.norm.pdf(y, 0, sigma)
    if b < 1e-14:
        return (stats.norm.cdf(y / sigma) - stats.norm.cdf((y - a) / sigma)) / a
    if a < 1e-14:
        return (stats.norm.cdf((y + b) / sigma) - stats.norm.cdf(y / sigma)) / b
    z = lambda u: u / sigma  # noqa: E731
    return sigma / (a * b) * (_ramp(z(y + b)) - _ramp(z(y + b - a)) - _ramp(z(y)) + _ramp(z(y - a)))


def _exact_fisher(lam, model, population_fn, step):
    """Fisher information of ``N_H / (N_H + N_V)`` by enumerating the counts (noiseless)."""
    n = model.photon_budget_n
    m = np.arange(n + 1)
    weight_m = stats.binom.pmf(m, n, model.success_probability_p)
    k, mm = np.meshgrid(m, m[1:], indexing="xy")
    valid = k <= mm
    ratios = (k / mm)[valid]
    keys, inverse = np.unique(ratios, return_inverse=True)

    def distribution(s):
        joint = weight_m[1:, None] * stats.binom.pmf(k, mm, s)
        probs = np.bincount(inverse, weights=joint[valid], minlength=keys.size)
        return probs / probs.sum()

    s0 = _check_population(population_fn(lam))
    p0 = distribution(s0)
    dp = (distribution(population_fn(lam + step)) - distribution(population_fn(lam - step))) / (2 * step)
    keep = p0 > 1e-300
    return float(np.sum(dp[keep] ** 2 / p0[keep]))


def fisher_information(
    lam: float,
    model: NoiseModel,
    population_fn: Callable[[float], float],
    step: float = LAMBDA_UNIT / 1000,
    density: str = "gaussian",
) -> float:
    """Classical Fisher information of the measured population ``S'`` about ``lam``.

    ``density="gaussian"`` uses the normal law with the propagated mean and
    standard deviation of ``S'``; ``"convolved"`` keeps the uniform noise terms
    exact. The score is a central difference in ``lam`` and the integral over
    ``S'`` a trapezoid rule on a uniform grid. When ``p N S (1 - S)`` is below
    the normal-approximation guard and the model is noiseless, the count
    distribution is enumerated exactly instead.
    """
    if density not in FISHER_DENSITIES:
        raise ValueError(f"unknown density {density!r}; expected one of {FISHER_DENSITIES}")
    if step <= 0:
        raise ValueError("step must be positive")
    s0 = _check_population(population_fn(lam))
    slope = (population_fn(lam + step) - population_fn(lam - step)) / (2 * step)
    sigma0 = std_s_prime(s0, model)
    if slope != 0 and sigma0 > 0:
        # keep the mean shift per step well inside one standard deviation
        step = min(step, 0.01 * sigma0 / abs(slope))
    s_lo, s_hi = population_fn(lam - step), population_fn(lam + step)
    p, n = model.success_probability_p, model.photon_budget_n
    if p * n * s0 * (1 - s0) < NORMAL_GUARD:
        if model.noiseless and n <= EXACT_MAX_N:
            return _exact_fisher(lam, model, population_fn, step)
        log.warning("p N S(1-S) = %.3g below %g; normal approximation used anyway", p * n * s0 * (1 - s0), NORMAL_GUARD)
    pdf = _gaussian_pdf if density == "gaussian" else _convolved_pdf
    sigma = min(std_s_prime(s, model) for s in (s_lo, s0, s_hi))
    if sigma == 0:
        return 0.0
    lo = min(s_lo, s0, s_hi) - model.eta_v - 12 * sigma
    hi = max(s_lo, s0, s_hi) + model.eta_h + 12 * sigma
    dx = sigma / 50
    etas = [e for e in (model.eta_h, model.eta_v) if e > 0]
    if density == "convolved" and etas:
        dx = min(dx, min(etas) / 200)
    x = np.linspace(lo, hi, int(math.ceil((hi - lo) / dx)) + 1)
    f0 = pdf(x, s0, model)
    df = (pdf(x, s_hi, model) - pdf(x, s_lo, model)) / (2 * step)
    keep = f0 > 1e-12 * f0.max()
    integrand = np.zeros_like(x)
    integrand[keep] = df[keep] ** 2 / f0[keep]
    return float(max(trapezoid(integrand, x), 0.0))


def gaussian_fisher_analytic(lam: float, model: NoiseModel, population_fn, step: float = LAMBDA_UNIT / 1000) -> float:
    """``mu'^2 / sigma^2 + 2 (sigma' / sigma)^2`` for the Gaussian density."""
    s = population_fn(lam)
    ds = (population_fn(lam + step) - population_fn(lam - step)) / (2 * step)
    mu_prime = (1 - 0.5 * (model.eta_h + model.eta_v)) * ds
    sig = std_s_prime(s, model)
    sig_prime = (
        std_s_prime(population_fn(lam + step), model) - std_s_prime(population_fn(lam - step), model)
    ) / (2 * step)
    return mu_prime**2 / sig**2 + 2 * (sig_prime / sig) ** 2


def with_success_probability(model: NoiseModel, p: float) -> NoiseModel:
    return replace(model, success_probability_p=p)
