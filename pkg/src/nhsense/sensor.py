"""Qubit sensor Hamiltonians and their exact dynamics.

Three sensor families are supported, selected by ``SensorConfig.kind``:

``"bare"``
    The two-parameter non-Hermitian sensor
    ``(w + i g)/(1 + a) [[1, a/delta], [delta, a]]`` whose eigenstates are
    ``|0> + delta|1>`` and ``|0> - (delta/a)|1>`` with splitting ``w + i g``.
``"hermitian"``
    The reference sensor ``H = lam * sigma_x`` with no bare part.
``"explicit"``
    ``sigma_x + (c + i d) sigma_z``, a non-Hermitian sensor without any
    pseudo-Hermiticity.

All families are perturbed as ``H(lam) = H_bare + lam * V`` with ``V = sigma_x``
by default.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .linalg import KET_0, SIGMA_X, as_matrix, expm2, population

log = logging.getLogger(__name__)

# unit in which the weak signal lam is quoted
LAMBDA_UNIT = 1e-3
DEFAULT_DELTA = 0.3015
DEFAULT_ENERGY = DEFAULT_DELTA / 50
EXPLICIT_TIME = 5.45
SENSOR_KINDS = ("bare", "hermitian", "explicit")


@dataclass(frozen=True)
class SensorConfig:
    """Parameters of a perturbed qubit sensor.

    ``omega + 1j * gamma`` is the full complex energy splitting ``2E``; the
    defaults give the pseudo-Hermitian sensor with ``delta = 0.3015`` and
    ``E = delta / 50``.
    """

    kind: str = "bare"
    delta: complex = DEFAULT_DELTA
    a: complex = 1.0
    omega: float = 2 * DEFAULT_ENERGY
    gamma: float = 0.0
    c: float = 0.75
    d: float = -0.5
    coupling_lambda: float = 0.0
    perturbation: np.ndarray = field(default_factory=lambda: SIGMA_X.copy(), compare=False)

    def __post_init__(self):
        if self.kind not in SENSOR_KINDS:
            raise ValueError(f"unknown sensor kind {self.kind!r}; expected one of {SENSOR_KINDS}")
        object.__setattr__(self, "perturbation", as_matrix(self.perturbation))
        if self.kind == "bare":
            if abs(self.a) > 1 + 1e-12:
                raise ValueError(f"|a| must not exceed 1, got {abs(self.a):.6g}")
            if abs(self.delta) >= 0.5:
                log.warning("|delta| = %.3g is not small; the sensing regime assumes |delta| << 1", abs(self.delta))

    @property
    def splitting(self) -> complex:
        """Complex energy splitting ``2E = omega + i gamma``."""
        return complex(self.omega, self.gamma)

    @property
    def energy(self) -> complex:
        return self.splitting / 2

    def default_time(self) -> float:
        """Evolution time used by the default experiments."""
        if self.kind == "explicit":
            return EXPLICIT_TIME
        return math.pi / (2 * self.energy.real)

    def bare_hamiltonian(self) -> np.ndarray:
        if self.kind == "bare":
            return build_bare_hamiltonian(self)
        if self.kind == "explicit":
            return build_explicit_example(self.c, self.d, 0.0)
        return np.zeros((2, 2), dtype=complex)

    def hamiltonian(self, lam: float | None = None) -> np.ndarray:
        """Full Hamiltonian ``H_bare + lam V`` (``lam`` defaults to ``coupling_lambda``)."""
        if lam is None:
            lam = self.coupling_lambda
        return self.bare_hamiltonian() + lam * self.perturbation

    def with_lambda(self, lam: float) -> "SensorConfig":
        return replace(self, coupling_lambda=lam)


@dataclass(frozen=True)
class DynamicsPoint:
    time: float
    d_t: complex
    state: np.ndarray
    population_s: float


def build_bare_hamiltonian(cfg: SensorConfig) -> np.ndarray:
    a, delta = complex(cfg.a), complex(cfg.delta)
    if abs(1 + a) < 1e-12:
        raise ValueError("a = -1 makes the bare Hamiltonian singular")
    if abs(delta) < 1e-300:
        raise ValueError("delta = 0 makes the bare Hamiltonian singular")
    return cfg.splitting / (1 + a) * np.array([[1, a / delta], [delta, a]], dtype=complex)


def build_explicit_example(c: float, d: float, lam: float = 0.0) -> np.ndarray:
    """``(1 + lam) sigma_x + (c + i d) sigma_z``."""
    z = complex(c, d)
    return np.array([[z, 1 + lam], [1 + lam, -z]], dtype=complex)


def closed_form_evolution(cfg: SensorConfig, t: float) -> DynamicsPoint:
    """Unperturbed bare-sensor dynamics from ``|0>`` in closed form.

    The returned state is ``(1 - z)/(1 + a) (D_t |0> + delta |1>)`` with
    ``z = exp(2iEt)`` and ``D_t = (1 + a z)/(1 - z)``, which equals
    ``exp(2iEt) exp(-iHt)|0>``. At the poles ``z = 1`` the state is ``|0>``
    and ``d_t`` is reported as complex infinity.
    """
    if cfg.kind != "bare":
        raise ValueError("closed-form evolution only applies to the bare sensor")
    if cfg.coupling_lambda != 0:
        raise ValueError("closed-form evolution is derived for lam = 0; use evolve() instead")
    a, delta = complex(cfg.a), complex(cfg.delta)
    if abs(1 + a) < 1e-12:
        raise ValueError("a = -1 makes the bare Hamiltonian singular")
    z = cmath.exp(1j * cfg.splitting * t)
    if abs(1 - z) < 1e-12:
        state = KET_0.copy()
        d_t = complex(math.inf, math.inf)
    else:
        state = np.array([(1 + a * z) / (1 + a), delta * (1 - z) / (1 + a)], dtype=complex)
        d_t = (1 + a * z) / (1 - z)
    return DynamicsPoint(time=t, d_t=d_t, state=state, population_s=population(state))


def matched_population(d_abs, delta_abs):
    """Population of ``|0>`` for the state ``D|0> + delta|1>`` in terms of magnitudes."""
    d2 = np.square(d_abs)
    return d2 / (np.square(delta_abs) + d2)


def evolve(cfg: SensorConfig, t: float, lam: float | None = None, initial=KET_0) -> np.ndarray:
    """Exact ``exp(-i H(lam) t) |initial>`` by closed-form exponentiation."""
    return expm2(cfg.hamiltonian(lam), -1j * t) @ np.asarray(initial, dtype=complex)


def population_at(cfg: SensorConfig, lam: float, t: float | None = None) -> float:
    t = cfg.default_time() if t is None else t
    return population(evolve(cfg, t, lam))


def hermitian_population(lam, t):
    """``(1 + cos 2 lam t) / 2`` for the reference sensor ``lam sigma_x``."""
    return 0.5 * (1 + np.cos(2 * np.asarray(lam) * t))


def hermitian_susceptibility(lam, t):
    return -t * np.sin(2 * np.asarray(lam) * t)


def susceptibility_analytic(
    population_fn: Callable[[float], float], lam: float, step: float = LAMBDA_UNIT / 100
) -> float:
    """Central-difference estimate of ``dS/dlam``."""
    if step <= 0:
        raise ValueError("step must be positive")
    return (population_fn(lam + step) - population_fn(lam - step)) / (2 * step)


def supplement_configurations(delta: float = 0.05) -> dict[str, tuple[SensorConfig, float]]:
    """The three lossy sensing configurations with ``gamma = -1``.

    Returns ``name -> (config, evolution time)``. For ``a = e|delta|`` and
    ``a = delta`` the working point puts ``D_t`` exactly at zero; for
    ``a = delta**2`` the eigenstates are orthogonal and ``|D_t| = |delta|``.
    """
    out = {}
    for name, a in (("a=e*delta", math.e * abs(delta)), ("a=delta", delta)):
        t = -math.log(a)
        out[name] = (SensorConfig(delta=delta, a=a, omega=-math.pi / math.log(a), gamma=-1.0), t)
    t = -math.log(delta)
    out["a=delta^2"] = (
        SensorConfig(delta=delta, a=delta**2, omega=-math.pi / (2 * math.log(delta)), gamma=-1.0),
        t,
    )
    return out
