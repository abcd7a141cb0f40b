import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from nhsense.linalg import IDENTITY, KET_0, TotalLossError, eig2, is_unitary, population
from nhsense.sensor import LAMBDA_UNIT, DEFAULT_DELTA, DEFAULT_ENERGY, SensorConfig, hermitian_population
from nhsense.stroboscopic import (
    CountRecord,
    SegmentPlan,
    discrete_susceptibility,
    energy_shift,
    locate_working_point,
    population_from_counts,
    response_window,
    segment_operator,
    stroboscopic_evolve,
    success_probability,
    sweep_lambda,
)

EPS = LAMBDA_UNIT
T_DEFAULT = math.pi / (2 * DEFAULT_ENERGY)


def default_plan(**kwargs):
    return SegmentPlan.over(SensorConfig(**kwargs), T_DEFAULT, 5)


def alpha_beta(lam, e=DEFAULT_ENERGY, delta=DEFAULT_DELTA):
    alpha = np.sqrt(complex((e * delta + lam) * (e + delta * lam) / delta))
    return alpha, e * delta + lam


def test_plan_total_time():
    plan = default_plan()
    assert abs(plan.total_time - T_DEFAULT) < 1e-12 * T_DEFAULT
    with pytest.raises(ValueError):
        SegmentPlan(tau=1.0, n_segments=0, config=SensorConfig())


@pytest.mark.parametrize("lam", [0.0, 0.5 * EPS, -0.389 * EPS, 1.7 * EPS, -1.9 * EPS])
def test_segment_operator_against_alpha_beta_closed_form(lam):
    plan = default_plan()
    u = segment_operator(plan, lam)
    alpha, beta = alpha_beta(lam)
    tau = plan.tau
    assert abs(u[0, 0] - np.cos(alpha * tau)) < 1e-10
    assert abs(u[1, 1] - np.cos(alpha * tau)) < 1e-10
    assert abs(u[1, 0] - (-1j * beta / alpha * np.sin(alpha * tau))) < 1e-10
    # the (0, 1) entry carries (E + delta lam) rather than beta for V = sigma_x
    upper = -1j * (DEFAULT_ENERGY + DEFAULT_DELTA * lam) / (DEFAULT_DELTA * alpha) * np.sin(alpha * tau)
    assert abs(u[0, 1] - upper) < 1e-10


def test_segment_operator_unperturbed_lower_entry():
    plan = default_plan()
    u = segment_operator(plan, 0.0)
    assert abs(u[1, 0] - (-1j * DEFAULT_DELTA * np.sin(DEFAULT_ENERGY * plan.tau))) < 1e-12


def test_segment_operator_zero_duration():
    plan = SegmentPlan(tau=0.0, n_segments=5, config=SensorConfig())
    assert_allclose(segment_operator(plan, 1e-3), IDENTITY, atol=0)


def test_segment_operator_matches_scipy_oracle():
    plan = default_plan()
    lam = 0.5 * EPS
    cfg = plan.config
    expected = scipy.linalg.expm(-1j * (cfg.hamiltonian(lam) - cfg.energy * np.eye(2)) * plan.tau)
    assert_allclose(segment_operator(plan, lam), expected, atol=1e-10)


def test_generic_asymmetry_uses_exponential_path(caplog):
    caplog.set_level("DEBUG")
    plan = SegmentPlan.over(SensorConfig(a=0.5), 10.0)
    u = segment_operator(plan, 0.0)
    cfg = plan.config
    expected = scipy.linalg.expm(-1j * (cfg.hamiltonian(0.0) - cfg.energy * np.eye(2)) * plan.tau)
    assert_allclose(u, expected, atol=1e-12)
    assert "generic path" in caplog.text


def test_single_segment_is_one_application():
    plan = SegmentPlan(tau=7.0, n_segments=1, config=SensorConfig())
    assert_allclose(stroboscopic_evolve(plan, KET_0, 2e-4), segment_operator(plan, 2e-4) @ KET_0)


def test_five_segments_reach_dark_point():
    psi = stroboscopic_evolve(default_plan(), KET_0, 0.0)
    assert population(psi) < 1e-20


def test_segments_compose_like_one_long_segment():
    five = default_plan()
    one = SegmentPlan(tau=5 * five.tau, n_segments=1, config=five.config)
    for lam in (0.0, 3e-4, -1.2e-3):
        assert_allclose(stroboscopic_evolve(five, KET_0, lam), stroboscopic_evolve(one, KET_0, lam), atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.02, 0.45),
    st.floats(0.1, 1.0),
    st.floats(0.001, 0.1),
    st.floats(-0.05, 0.05),
    st.integers(1, 8),
    st.floats(1.0, 300.0),
)
def test_segmented_equals_total_evolution(delta, a, omega, lam, n, t):
    cfg = SensorConfig(delta=delta, a=a, omega=omega)
    plan = SegmentPlan.over(cfg, t, n)
    total = scipy.linalg.expm(-1j * (cfg.hamiltonian(lam) - cfg.energy * np.eye(2)) * t) @ KET_0
    got = stroboscopic_evolve(plan, KET_0, lam)
    assert_allclose(got, total, rtol=1e-9, atol=1e-10 * max(1.0, np.abs(total).max()))


@settings(max_examples=100, deadline=None)
@given(st.floats(-2e-3, 2e-3), st.floats(0.05, 0.4), st.floats(0.5, 1.0))
def test_final_norm_predicted_by_eigendecomposition(lam, delta, a):
    cfg = SensorConfig(delta=delta, a=a)
    plan = SegmentPlan.over(cfg, cfg.default_time(), 5)
    generator = cfg.hamiltonian(lam) - energy_shift(cfg) * IDENTITY
    values, vectors = eig2(generator)
    p = np.column_stack(vectors)
    coeffs = np.linalg.solve(p, KET_0)
    predicted = p @ (coeffs * np.exp(-1j * np.array(values) * plan.total_time))
    got = stroboscopic_evolve(plan, KET_0, lam)
    assert abs(np.linalg.norm(got) - np.linalg.norm(predicted)) < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.01, 0.01), st.floats(0.1, 100.0))
def test_hermitian_segments_are_unitary(lam, tau):
    for cfg in (SensorConfig(kind="hermitian"), SensorConfig(kind="explicit", d=0.0)):
        assert is_unitary(segment_operator(SegmentPlan(tau=tau, n_segments=5, config=cfg), lam), 1e-10)


def test_total_loss_is_an_error():
    # uniform absorption e^{-100} per segment empties the state below the floor
    cfg = SensorConfig(kind="hermitian", perturbation=-100j * IDENTITY)
    plan = SegmentPlan(tau=1.0, n_segments=5, config=cfg)
    with pytest.raises(TotalLossError):
        stroboscopic_evolve(plan, KET_0, 1.0)


def test_success_probability_is_clamped():
    plan = default_plan()
    for lam in np.linspace(-2e-3, 2e-3, 21):
        p = success_probability(plan, lam)
        assert 0 < p <= 1
    herm = SegmentPlan.over(SensorConfig(kind="hermitian"), T_DEFAULT)
    assert abs(success_probability(herm, 1e-3) - 1) < 1e-12


def test_population_from_counts():
    assert population_from_counts(CountRecord(0, 100)) == 0.0
    assert population_from_counts(CountRecord(50, 50)) == 0.5
    assert population_from_counts(CountRecord(34, 66)) == 0.34
    with pytest.raises(ValueError):
        population_from_counts(CountRecord(0, 0))
    with pytest.raises(ValueError):
        CountRecord(-1, 3)


def test_discrete_susceptibility_trivial_cases():
    assert_allclose(discrete_susceptibility([0, 1, 2], [0.3, 0.3, 0.3]), [0, 0])
    slope = -7.25
    lam = np.array([0.0, EPS, 3 * EPS])
    assert_allclose(discrete_susceptibility(lam, 1 + slope * lam), [slope, slope], rtol=1e-12)


@pytest.mark.parametrize(
    "lam,s",
    [([0, 1], [0.1]), ([0], [0.1]), ([0, 0], [0.1, 0.2]), ([1, 0], [0.1, 0.2])],
)
def test_discrete_susceptibility_rejects_bad_input(lam, s):
    with pytest.raises(ValueError):
        discrete_susceptibility(lam, s)


def test_hermitian_sweep_matches_cosine_law():
    plan = SegmentPlan.over(SensorConfig(kind="hermitian"), T_DEFAULT)
    grid = np.linspace(-2, 2, 41) * EPS
    sweep = sweep_lambda(plan, grid)
    assert_allclose(sweep.population, hermitian_population(grid, T_DEFAULT), atol=1e-10)
    assert sweep.chi.shape == (40,)


def test_single_point_sweep():
    sweep = sweep_lambda(default_plan(), [0.0])
    assert sweep.population.shape == (1,)
    assert sweep.chi.size == 0


def test_sweep_rejects_non_monotone_grid():
    with pytest.raises(ValueError):
        sweep_lambda(default_plan(), [0.0, 0.0])


def test_forward_difference_error_bounds_on_default_grid():
    plan = default_plan()
    grid = np.linspace(-2, 2, 81) * EPS
    sweep = sweep_lambda(plan, grid)
    fine = np.linspace(-2, 2, 8001) * EPS
    s_fine = sweep_lambda(plan, fine).population
    chi_fine = np.gradient(s_fine, fine)
    dchi = np.gradient(chi_fine, fine)
    d2chi = np.gradient(dchi, fine)
    h = grid[1] - grid[0]
    chi_at_left = np.interp(grid[:-1], fine, chi_fine)
    chi_at_mid = np.interp(0.5 * (grid[1:] + grid[:-1]), fine, chi_fine)
    # Taylor bounds: forward difference vs left-point and midpoint derivatives
    assert np.all(np.abs(sweep.chi - chi_at_left) <= np.abs(dchi).max() * h / 2 * 1.01)
    assert np.all(np.abs(sweep.chi - chi_at_mid) <= np.abs(d2chi).max() * h**2 / 24 * 1.05 + 1.0)


def test_locate_working_point_hermitian():
    fn = lambda lam: float(hermitian_population(lam, T_DEFAULT))  # noqa: E731
    lam_star, chi_max = locate_working_point(fn, np.linspace(0, 5, 51) * EPS)
    assert abs(lam_star - math.pi / (4 * T_DEFAULT)) < 2e-6 * EPS
    # central-difference truncation at the peak: t (2 t h)^2 / 6 with h = eps / 100
    h = EPS / 100
    assert abs(chi_max - T_DEFAULT) <= T_DEFAULT * (2 * T_DEFAULT * h) ** 2 / 6 * 1.01


def test_response_window_brackets_the_dip():
    lam = np.linspace(-1, 1, 21)
    s = np.minimum(1.0, lam**2 * 4)
    s[0] = 0.9  # local maximum one step in from the left end
    lo, hi = response_window(lam, s)
    assert lo == lam[1]
    assert hi == 1.0
