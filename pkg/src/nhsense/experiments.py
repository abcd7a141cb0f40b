"""Scenario runners: each turns an ``ExperimentConfig`` into a ``ResultTable``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .linalg import KET_0, population
from .noise import NoiseModel, estimate, fisher_information
from .optics import WavePlateAngles, decompose_operator, sweep_theta1, sweep_theta1_hermitian
from .sensor import LAMBDA_UNIT, SensorConfig, population_at, supplement_configurations, susceptibility_analytic
from .stroboscopic import (
    SegmentPlan,
    locate_working_point,
    segment_operator,
    stroboscopic_evolve,
    success_probability,
    sweep_lambda,
)
from .tables import ResultTable

# coarse grid bracketing the working point of the lambda sensors
WORKING_GRID = np.linspace(-2, 2, 81) * LAMBDA_UNIT

# x column and y columns drawn by ``--svg`` for each scenario
PLOTS = {
    "sweep-lambda": ("lambda_over_eps", ["S"]),
    "sweep-theta1": ("theta1_over_pi", ["S_nonH", "S_H"]),
    "noise-sweep": ("eta_h", ["delta_lambda_nonH", "delta_lambda_H"]),
    "fisher-sweep": ("N", ["fisher_nonH", "fisher_H"]),
    "decompose": ("lambda_over_eps", ["residual"]),
    "supplement-configs": ("lambda", ["S_a", "S_b", "S_c"]),
}
LOG_X = {"fisher-sweep"}


@dataclass(frozen=True)
class WorkingPoint:
    lam: float
    chi_max: float
    population: float
    success_probability: float


def _plan(cfg: ExperimentConfig) -> SegmentPlan:
    return SegmentPlan.over(cfg.sensor.build(), cfg.plan.total_time, cfg.plan.n_segments)


def _population_fn(plan: SegmentPlan):
    return lambda lam: population(stroboscopic_evolve(plan, KET_0, lam))


def _with_last_nan(chi: np.ndarray, n: int) -> np.ndarray:
    out = np.full(n, np.nan)
    out[: chi.size] = chi
    return out


def sensor_working_point(plan: SegmentPlan) -> WorkingPoint:
    fn = _population_fn(plan)
    lam, chi = locate_working_point(fn, WORKING_GRID)
    return WorkingPoint(lam, chi, fn(lam), success_probability(plan, lam))


def hermitian_working_point(total_time: float) -> WorkingPoint:
    """Reference sensor ``lam sigma_x``: steepest at ``S = 1/2`` with ``|chi| = t``."""
    return WorkingPoint(math.pi / (4 * total_time), total_time, 0.5, 1.0)


def run_sweep_lambda(cfg: ExperimentConfig) -> ResultTable:
    plan = _plan(cfg)
    grid = cfg.grid.points()
    sweep = sweep_lambda(plan, grid)
    fn = _population_fn(plan)
    theory = np.array([susceptibility_analytic(fn, lam) for lam in grid])
    rows = np.column_stack(
        [grid / LAMBDA_UNIT, grid, sweep.population, _with_last_nan(sweep.chi, grid.size), theory]
    )
    return ResultTable(["lambda_over_eps", "lambda", "S", "chi", "chi_theory"], rows)


def theta1_fixed_angles(cfg: ExperimentConfig) -> WavePlateAngles:
    o = cfg.optics
    return WavePlateAngles.from_pi(
        phi1_pi=o.phi1_pi, phi2_pi=o.phi2_pi, theta2_pi=o.theta2_pi, theta_h_pi=o.theta_h_pi, theta_v_pi=o.theta_v_pi
    )


def run_sweep_theta1(cfg: ExperimentConfig) -> ResultTable:
    grid = cfg.grid.points()
    fixed = theta1_fixed_angles(cfg)
    n = cfg.plan.n_segments
    lossy = sweep_theta1(grid, fixed, n, cfg.optics.loss_convention)
    herm = sweep_theta1_hermitian(grid, fixed, n)
    rows = np.column_stack(
        [
            grid / math.pi,
            grid,
            lossy.population,
            _with_last_nan(lossy.chi, grid.size),
            herm.population,
            _with_last_nan(herm.chi, grid.size),
        ]
    )
    return ResultTable(["theta1_over_pi", "theta1", "S_nonH", "chi_nonH", "S_H", "chi_H"], rows)


def run_noise_sweep(cfg: ExperimentConfig) -> ResultTable:
    plan = _plan(cfg)
    nonh = sensor_working_point(plan)
    herm = hermitian_working_point(plan.total_time)
    noise = cfg.noise
    rows = []
    for i, eta_h in enumerate(cfg.grid.points()):
        reports = []
        for k, wp in enumerate((nonh, herm)):
            model = NoiseModel.with_ratio(
                eta_h, noise.eta_v_ratio, photon_budget_n=noise.photon_budget_n,
                success_probability_p=wp.success_probability,
            )
            reports.append(estimate(wp.population, wp.chi_max, model, noise.repetitions, cfg.seed, 2 * i + k))
        rows.append([eta_h, reports[0].delta_lambda, reports[1].delta_lambda, reports[0].std_s_prime, reports[1].std_s_prime])
    return ResultTable(["eta_h", "delta_lambda_nonH", "delta_lambda_H", "std_nonH", "std_H"], rows)


def run_fisher_sweep(cfg: ExperimentConfig) -> ResultTable:
    plan = _plan(cfg)
    nonh = sensor_working_point(plan)
    t = plan.total_time
    herm = hermitian_working_point(t)
    fn = _population_fn(plan)

    def fn_h(lam):
        return 0.5 * (1 + math.cos(2 * lam * t))

    rows = []
    for n in np.unique(np.rint(cfg.grid.points()).astype(np.int64)):
        base = NoiseModel(cfg.noise.eta_h, cfg.noise.eta_v, int(n))
        model_nonh = NoiseModel(base.eta_h, base.eta_v, int(n), nonh.success_probability)
        rows.append([n, fisher_information(nonh.lam, model_nonh, fn), fisher_information(herm.lam, base, fn_h)])
    return ResultTable(["N", "fisher_nonH", "fisher_H"], rows)


def run_decompose(cfg: ExperimentConfig) -> ResultTable:
    plan = _plan(cfg)
    rows = []
    for lam in cfg.grid.points():
        report = decompose_operator(
            segment_operator(plan, lam), cfg.optics.fit_convention, n_starts=cfg.optics.n_starts, seed=cfg.seed
        )
        a = report.angles.as_pi()
        rows.append(
            [
                lam / LAMBDA_UNIT,
                a["theta1_pi"], a["phi1_pi"], a["theta2_pi"], a["phi2_pi"], a["theta_h_pi"], a["theta_v_pi"],
                report.residual, abs(report.scale), report.iterations, float(report.converged),
            ]
        )
    columns = [
        "lambda_over_eps", "theta1_pi", "phi1_pi", "theta2_pi", "phi2_pi", "theta_h_pi", "theta_v_pi",
        "residual", "scale_abs", "iterations", "converged",
    ]
    return ResultTable(columns, rows)


def run_supplement_configs(cfg: ExperimentConfig) -> ResultTable:
    grid = cfg.grid.points()
    configs = list(supplement_configurations(cfg.supplement.delta).values())
    pops = [np.array([population_at(sc, lam, t) for lam in grid]) for sc, t in configs]
    chis = [_with_last_nan(np.diff(p) / np.diff(grid), grid.size) for p in pops]
    rows = np.column_stack([grid, *pops, *chis])
    return ResultTable(["lambda", "S_a", "S_b", "S_c", "chi_a", "chi_b", "chi_c"], rows)


RUNNERS = {
    "sweep-lambda": run_sweep_lambda,
    "sweep-theta1": run_sweep_theta1,
    "noise-sweep": run_noise_sweep,
    "fisher-sweep": run_fisher_sweep,
    "decompose": run_decompose,
    "supplement-configs": run_supplement_configs,
}


def run(cfg: ExperimentConfig) -> ResultTable:
    """Validate ``cfg``, run its scenario and attach the re-run metadata."""
    cfg.validate()
    table = RUNNERS[cfg.scenario](cfg)
    table.metadata = {
        "toolkit": "nhsense",
        "version": __version__,
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
    }
    return table


def hermitian_counterpart(cfg: SensorConfig) -> SensorConfig:
    """Lossless sensor used as the reference for ``cfg``."""
    if cfg.kind == "explicit":
        return SensorConfig(kind="explicit", c=cfg.c, d=0.0)
    return SensorConfig(kind="hermitian")
