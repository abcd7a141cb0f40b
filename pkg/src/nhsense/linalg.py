"""Closed-form linear algebra for complex 2x2 operators.

Operators are plain ``(2, 2)`` complex numpy arrays and pure states are
``(2,)`` complex arrays over the basis ``|0> = |H>``, ``|1> = |V>``.
States are never assumed normalized: non-unitary evolution changes the norm.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)

# below this |mu| the sinh(mu)/mu factor is replaced by its series
SERIES_CUTOFF = 1e-8
DEFECT_TOL = 1e-10
TOTAL_LOSS_NORM2 = 1e-300


class ExceptionalPointError(ValueError):
    """Raised when a 2x2 matrix is defective (coalescing eigenvectors)."""


class TotalLossError(ValueError):
    """Raised when a state has lost (numerically) all of its amplitude."""


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError(f"expected a 2-component state, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("state has non-finite amplitudes")
    if np.vdot(psi, psi).real < TOTAL_LOSS_NORM2:
        raise TotalLossError("state has zero norm")
    return psi


def is_hermitian(m, tol: float = 1e-12) -> bool:
    m = as_matrix(m)
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=tol))


def is_unitary(m, tol: float = 1e-12) -> bool:
    m = as_matrix(m)
    return bool(np.allclose(m.conj().T @ m, IDENTITY, rtol=0.0, atol=tol))


def _split_trace(m: np.ndarray) -> tuple[complex, np.ndarray, complex]:
    """Return ``(tr/2, A, mu)`` with ``m = tr/2 I + A`` and ``A @ A = mu**2 I``."""
    half_trace = 0.5 * (m[0, 0] + m[1, 1])
    a = m - half_trace * IDENTITY
    mu2 = a[0, 0] ** 2 + a[0, 1] * a[1, 0]  # = -det(A) for traceless A
    return complex(half_trace), a, cmath.sqrt(complex(mu2))


def expm2(m, scale: complex = 1.0) -> np.ndarray:
    """Exact ``exp(scale * m)`` for a 2x2 complex matrix.

    Uses ``exp(s m) = exp(s tr/2) [cosh(s mu) I + sinh(s mu)/(s mu) s A]``
    where ``A`` is the traceless part of ``m`` and ``A**2 = mu**2 I``.
    """
    m = as_matrix(m)
    scale = complex(scale)
    if not cmath.isfinite(scale):
        raise ValueError("scale must be finite")
    half_trace, a, mu = _split_trace(m)
    nu = scale * mu
    if abs(nu) < SERIES_CUTOFF:
        c, sinhc = 1.0 + nu * nu / 2.0, 1.0 + nu * nu / 6.0
    else:
        c, sinhc = cmath.cosh(nu), cmath.sinh(nu) / nu
    return cmath.exp(scale * half_trace) * (c * IDENTITY + (sinhc * scale) * a)


def _rescale(z: complex, exponent: int) -> complex:
    return complex(math.ldexp(z.real, exponent), math.ldexp(z.imag, exponent))


def _gauge(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    if abs(v[0]) > 1e-12:
        return v / v[0]
    return v / v[1]


def eig2(m) -> tuple[tuple[complex, complex], tuple[np.ndarray, np.ndarray]]:
    """Eigenvalues and eigenvectors of a diagonalizable 2x2 matrix.

    Eigenvectors are gauged so that the ``|0>`` amplitude is 1 whenever it is
    nonzero (otherwise the ``|1>`` amplitude is 1).

    Raises
    ------
    ExceptionalPointError
        If the eigenvectors are linearly dependent within ``1e-10``.
    """
    m = as_matrix(m)
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return (0j, 0j), (KET_0.copy(), KET_1.copy())
    # eigenvectors are scale-free; an exact power-of-two rescale avoids under/overflow
    exponent = math.frexp(scale)[1]
    m = np.ldexp(m.real, -exponent) + 1j * np.ldexp(m.imag, -exponent)
    half_trace, a, mu = _split_trace(m)
    if np.abs(a).max() <= 1e-14:
        # scalar matrix: every vector is an eigenvector
        value = _rescale(half_trace, exponent)
        return (value, value), (KET_0.copy(), KET_1.copy())

    values = (half_trace + mu, half_trace - mu)
    vectors = []
    for lam in values:
        # each row of (m - lam I) is orthogonal to the eigenvector
        cand_a = np.array([-m[0, 1], m[0, 0] - lam])
        cand_b = np.array([m[1, 1] - lam, -m[1, 0]])
        v = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
        vectors.append(_gauge(v))

    u0 = vectors[0] / np.linalg.norm(vectors[0])
    u1 = vectors[1] / np.linalg.norm(vectors[1])
    if abs(u0[0] * u1[1] - u0[1] * u1[0]) < DEFECT_TOL:
        raise ExceptionalPointError("matrix is defective (exceptional point)")
    return (_rescale(values[0], exponent), _rescale(values[1], exponent)), (vectors[0], vectors[1])


def norm2(psi) -> float:
    psi = np.asarray(psi, dtype=complex)
    return float(np.vdot(psi, psi).real)


def population(psi) -> float:
    """Normalized population of ``|0>``: ``|c0|^2 / (|c0|^2 + |c1|^2)``."""
    psi = as_state(psi)
    p = np.abs(psi) ** 2
    return float(p[0] / (p[0] + p[1]))
