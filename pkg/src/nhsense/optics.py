"""Jones-calculus model of the wave-plate network.

One segment of the evolution is realized as ``u = R2 L R1`` with
``R_i = QWP(phi_i) HWP(theta_i)`` and a diagonal polarization-dependent loss
``L``. Angles are in radians; every plate is pi-periodic in its setting angle.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np
from scipy.optimize import least_squares, minimize

from .linalg import KET_0, as_matrix, population
from .stroboscopic import DEFAULT_SEGMENTS, discrete_susceptibility, check_grid

LOSS_CONVENTIONS = ("sin", "cos")
FIT_TOL = 1e-6


def canonical_angle(x: float) -> float:
    """Reduce ``x`` to ``(-pi/2, pi/2]``."""
    r = math.remainder(float(x), math.pi)
    return math.pi / 2 if r <= -math.pi / 2 else r


@dataclass(frozen=True)
class WavePlateAngles:
    """Setting angles of H1, Q1, H2, Q2 and the loss plates; defaults give ``i * I``."""

    theta1: float = 0.0
    phi1: float = 0.0
    theta2: float = 0.0
    phi2: float = math.pi / 2
    theta_h: float = math.pi / 4
    theta_v: float = math.pi / 4

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite")
            object.__setattr__(self, f.name, canonical_angle(value))

    @classmethod
    def from_vector(cls, x) -> "WavePlateAngles":
        return cls(*map(float, x))

    @classmethod
    def from_pi(cls, **kwargs) -> "WavePlateAngles":
        """Build from angles quoted in multiples of pi (``theta1_pi=-0.06`` etc.)."""
        return cls(**{k.removesuffix("_pi"): v * math.pi for k, v in kwargs.items()})

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])

    def as_pi(self) -> dict[str, float]:
        return {f"{k}_pi": v / math.pi for k, v in asdict(self).items()}


@dataclass(frozen=True)
class FitReport:
    angles: WavePlateAngles
    residual: float  # ||c M - T||_F / ||T||_F at the optimal complex scale c
    scale: complex
    iterations: int
    converged: bool


@dataclass
class ThetaSweep:
    theta1: np.ndarray
    population: np.ndarray
    chi: np.ndarray  # forward differences, per radian


def hwp(theta: float) -> np.ndarray:
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp(phi: float) -> np.ndarray:
    """Quarter-wave plate with fast axis at ``phi``; ``diag(1, i)`` at ``phi = 0``."""
    c, s = math.cos(phi), math.sin(phi)
    off = (1 - 1j) * s * c
    return np.array([[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]])


def loss_element(theta_h: float, theta_v: float, convention: str = "sin") -> np.ndarray:
    """Diagonal loss ``diag(f(2 theta_h), f(2 theta_v))`` with ``f`` = sin or cos.

    The ``sin`` convention is lossless at ``pi/4``; ``cos`` is lossless at 0.
    """
    if convention == "sin":
        f = math.sin
    elif convention == "cos":
        f = math.cos
    else:
        raise ValueError(f"unknown loss convention {convention!r}; expected one of {LOSS_CONVENTIONS}")
    return np.diag([f(2 * theta_h), f(2 * theta_v)]).astype(complex)


def retarder_pair(theta: float, phi: float) -> np.ndarray:
    """``R(theta, phi) = QWP(phi) HWP(theta)``."""
    return qwp(phi) @ hwp(theta)


def compose_train(angles: WavePlateAngles, convention: str = "sin") -> np.ndarray:
    r1 = retarder_pair(angles.theta1, angles.phi1)
    r2 = retarder_pair(angles.theta2, angles.phi2)
    return r2 @ loss_element(angles.theta_h, angles.theta_v, convention) @ r1


def hermitian_train(theta1: float, phi1: float, phi2: float) -> np.ndarray:
    """Lossless counterpart ``QWP(phi2) HWP(theta1) QWP(phi1)``."""
    return qwp(phi2) @ hwp(theta1) @ qwp(phi1)


def _best_scale(m: np.ndarray, target: np.ndarray) -> tuple[complex, float]:
    """Least-squares ``c`` minimizing ``||c m - target||_F`` and the residual norm."""
    mm = np.vdot(m, m).real
    if mm < 1e-300:
        return 0j, float(np.linalg.norm(target))
    c = np.vdot(m, target) / mm
    return complex(c), float(np.linalg.norm(c * m - target))


def _residual_vector(x, target, convention):
    m = compose_train(WavePlateAngles.from_vector(x), convention)
    c, _ = _best_scale(m, target)
    r = (c * m - target).ravel()
    return np.concatenate([r.real, r.imag])


def decompose_operator(
    target,
    convention: str = "sin",
    n_starts: int = 12,
    seed: int = 0,
    tol: float = FIT_TOL,
) -> FitReport:
    """Fit wave-plate angles so that ``c * compose_train(angles)`` matches ``target``.

    Each start runs a Nelder-Mead simplex search over the six angles, with the
    complex scale eliminated in closed form, followed by a least-squares polish.
    Starts are drawn from a fixed seed and the lowest residual wins; the search
    stops early once the residual drops below ``tol * 1e-6``.
    """
    target = as_matrix(target)
    norm = float(np.linalg.norm(target))
    if norm == 0:
        raise ValueError("target operator is zero")
    t = target / norm

    def objective(x):
        return _best_scale(compose_train(WavePlateAngles.from_vector(x), convention), t)[1]

    rng = np.random.default_rng(seed)
    starts = [WavePlateAngles().as_vector()]
    starts += list(rng.uniform(-math.pi / 2, math.pi / 2, size=(n_starts - 1, 6)))
    best_x, best_r, iterations = starts[0], math.inf, 0
    for x0 in starts:
        res = minimize(
            objective, x0, method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 3000, "maxfev": 4000},
        )
        iterations += res.nfev
        polish = least_squares(_residual_vector, res.x, args=(t, convention), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        iterations += polish.nfev
        x = polish.x if objective(polish.x) < res.fun else res.x
        r = objective(x)
        if r < best_r:
            best_x, best_r = x, r
        if best_r <= tol * 1e-6:
            break
    angles = WavePlateAngles.from_vector(best_x)
    c, _ = _best_scale(compose_train(angles, convention), t)
    return FitReport(
        angles=angles, residual=best_r, scale=c * norm, iterations=iterations, converged=best_r <= tol
    )


# fixed plate settings of the single-plate sensing demonstration
THETA1_FIXED = WavePlateAngles(
    phi1=0.5 * math.pi, phi2=-0.5 * math.pi, theta2=0.03 * math.pi, theta_h=0.0, theta_v=0.43 * math.pi
)
THETA1_CONVENTION = "cos"


def _train_population(m: np.ndarray, n_segments: int) -> float:
    psi = KET_0
    for _ in range(n_segments):
        psi = m @ psi
    return population(psi)


def sweep_theta1(
    grid,
    fixed: WavePlateAngles = THETA1_FIXED,
    n_segments: int = DEFAULT_SEGMENTS,
    convention: str = THETA1_CONVENTION,
) -> ThetaSweep:
    """Population of ``|H>`` after ``n_segments`` passes of the lossy train, per ``theta1``."""
    grid = check_grid(grid)
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    pops = np.array(
        [_train_population(compose_train(replace(fixed, theta1=th), convention), n_segments) for th in grid]
    )
    chi = discrete_susceptibility(grid, pops) if grid.size > 1 else np.empty(0)
    return ThetaSweep(theta1=grid, population=pops, chi=chi)


def sweep_theta1_hermitian(
    grid, fixed: WavePlateAngles = THETA1_FIXED, n_segments: int = DEFAULT_SEGMENTS
) -> ThetaSweep:
    grid = check_grid(grid)
    pops = np.array(
        [_train_population(hermitian_train(th, fixed.phi1, fixed.phi2), n_segments) for th in grid]
    )
    chi = discrete_susceptibility(grid, pops) if grid.size > 1 else np.empty(0)
    return ThetaSweep(theta1=grid, population=pops, chi=chi)
