"""Infinite-trader (mean-field) solutions.

The collective amplitude ``X0`` and the intensive densities ``eta`` and
``Qbar`` commute with everything in the limit, so they enter as plain
scalars fixed by the initial state.  Share counts of each trader then
oscillate at ``omega = sqrt((Phi - nu)^2 + 16 |X0|^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, ResonantCaseError

RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class MeanFieldParams:
    """Scalar data of the uniform-detuning model (``beta_l - alpha_l = Phi``).

    Use :meth:`from_traders` to take ``eta`` and ``Qbar`` as the finite-L
    means of the supplied shares and budgets.
    """

    Phi: float
    X0: complex
    eta: float
    Qbar: float
    n: tuple[float, ...]
    k: tuple[float, ...]
    X_l0: tuple[complex, ...] | None = None

    def __post_init__(self):
        n = tuple(float(v) for v in self.n)
        k = tuple(float(v) for v in self.k)
        if len(n) != len(k) or not n:
            raise ConfigError("n and k must be non-empty and of equal length")
        if min(n) < 0 or min(k) < 0:
            raise ConfigError("n_l and k_l must be non-negative")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "X0", complex(self.X0))
        if self.X_l0 is not None:
            xl = tuple(complex(v) for v in self.X_l0)
            if len(xl) != len(n):
                raise ConfigError("X_l0 must have one entry per trader")
            object.__setattr__(self, "X_l0", xl)

    @classmethod
    def from_traders(cls, Phi: float, X0: complex, n: Sequence[float], k: Sequence[float],
                     X_l0: Sequence[complex] | None = None) -> "MeanFieldParams":
        n = np.asarray(n, dtype=float)
        k = np.asarray(k, dtype=float)
        return cls(Phi, X0, float(n.mean()), float((n + k).mean()), tuple(n), tuple(k),
                   None if X_l0 is None else tuple(X_l0))

    @property
    def L(self) -> int:
        return len(self.n)

    def nu(self) -> float:
        return self.Phi + 4 * self.eta - 2 * self.Qbar

    def detuning(self) -> float:
        """``Phi - nu``."""
        return self.Phi - self.nu()

    def is_resonant(self) -> bool:
        return abs(self.detuning()) <= RESONANCE_TOL

    def Q(self, l: int) -> float:
        return self.n[l] + self.k[l]

    def omega(self) -> float:
        if self.is_resonant():
            return 4 * abs(self.X0)
        return math.sqrt(self.detuning() ** 2 + 16 * abs(self.X0) ** 2)

    def period(self) -> float:
        w = self.omega()
        return 2 * math.pi / w if w > 0 else math.inf


def _oscillation(n: float, k: float, detuning: float, coupling2: float, omega: float, t):
    """Shared closed form; ``coupling2`` multiplies ``(k (cos-1) - n (cos+1))``."""
    c = np.cos(omega * np.asarray(t, dtype=float))
    return (n * detuning ** 2 - coupling2 * (k * (c - 1) - n * (c + 1))) / omega ** 2


def nl_closed_form(p: MeanFieldParams, l: int, t):
    """Shares of trader ``l`` for ``Phi != nu``; period ``2 pi / omega``."""
    if p.is_resonant():
        raise ResonantCaseError("Phi == nu: use nl_resonant")
    d = p.detuning()
    return _oscillation(p.n[l], p.k[l], d, 8 * abs(p.X0) ** 2, p.omega(), t)


def resonant_amplitude(p: MeanFieldParams, l: int) -> float:
    """``B = (2i/omega)(conj(X0) X_l - X0 conj(X_l))``, real by construction."""
    if p.X_l0 is None:
        raise ConfigError("the resonant branch needs X_l0")
    w = p.omega()
    z, x = p.X0, p.X_l0[l]
    return float(((2j / w) * (z.conjugate() * x - z * x.conjugate())).real)


def nl_resonant(p: MeanFieldParams, l: int, t):
    """Shares of trader ``l`` when ``Phi == nu``, oscillating about ``Q_l / 2``."""
    t = np.asarray(t, dtype=float)
    if not p.is_resonant():
        raise ConfigError("nl_resonant requires Phi == nu")
    if p.X0 == 0:
        return np.full(t.shape, p.n[l])
    w = p.omega()
    half = p.Q(l) / 2
    return half + (p.n[l] - half) * np.cos(w * t) + resonant_amplitude(p, l) * np.sin(w * t)


def n_series(p: MeanFieldParams, l: int, t):
    """Dispatch to the resonant or generic closed form."""
    if p.is_resonant():
        return nl_resonant(p, l, t)
    return nl_closed_form(p, l, t)


def delta_matrix(p: MeanFieldParams) -> np.ndarray:
    """Generator of ``dTheta/dt = i Delta Theta`` for ``Theta = (Z, n, Z^dag)``.

    Rows for ``n`` and ``Z^dag`` carry ``conj(X0)`` where the equations of
    motion put the adjoint amplitude.
    """
    d, x = p.detuning(), p.X0
    xc = x.conjugate()
    return np.array([[d, 4 * x, 0],
                     [2 * xc, 0, -2 * x],
                     [0, -4 * xc, -d]], dtype=complex)


def _null_vector(A: np.ndarray) -> np.ndarray:
    # rank-2 3x3: bilinear cross product of the two most independent rows
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = np.cross(A[i], A[j])
        if best is None or np.linalg.norm(v) > np.linalg.norm(best):
            best = v
    return best / np.linalg.norm(best)


def delta_eigensystem(p: MeanFieldParams):
    """Eigenvalues ``(0, omega, -omega)`` and the matching (non-unitary) ``V``."""
    D = delta_matrix(p)
    w = p.omega()
    lams = np.array([0.0, w, -w])
    V = np.column_stack([_null_vector(D - lam * np.eye(3)) for lam in lams])
    return lams, V


def theta_initial(p: MeanFieldParams, l: int) -> np.ndarray:
    """``(Z_l(0), n_l, Z_l^dag(0))`` with ``Z_l = X_l - 2 X0 Q_l / (Phi - nu)``."""
    x_l = 0j if p.X_l0 is None else p.X_l0[l]
    z0 = x_l - 2 * p.X0 * p.Q(l) / p.detuning()
    return np.array([z0, p.n[l], z0.conjugate()])


def theta_system(p: MeanFieldParams, l: int, times) -> np.ndarray:
    """Second component of the linear ``Theta`` system, solved by eigen-expansion.

    The resonant case uses the affine system of ``(X_l e^{-i nu t}, n_l)``
    instead, integrated by matrix exponential.
    """
    times = np.asarray(times, dtype=float)
    if p.omega() == 0:
        return np.full(times.shape, p.n[l])
    if p.is_resonant():
        return _resonant_integrate(p, l, times)
    lams, V = delta_eigensystem(p)
    c = np.linalg.solve(V, theta_initial(p, l))
    phases = np.exp(1j * np.outer(times, lams))
    theta = phases * c @ V.T
    return theta[:, 1].real


def _resonant_integrate(p: MeanFieldParams, l: int, times) -> np.ndarray:
    # state (Y, n, conj Y, 1); dY/dt = 2i X0 (2n - Q), dn/dt = 2i (Y conj X0 - X0 conj Y)
    x, Q = p.X0, p.Q(l)
    xc = x.conjugate()
    A = np.array([[0, 4j * x, 0, -2j * x * Q],
                  [2j * xc, 0, -2j * x, 0],
                  [0, -4j * xc, 0, 2j * xc * Q],
                  [0, 0, 0, 0]], dtype=complex)
    y0 = 0j if p.X_l0 is None else p.X_l0[l]
    s0 = np.array([y0, p.n[l], y0.conjugate(), 1.0])
    return np.array([(expm(A * t) @ s0)[1].real for t in times])


def range_violations(p: MeanFieldParams, l: int, times, tol: float = 1e-9) -> np.ndarray:
    """Times where the closed form leaves ``[0, Q_l]``; reported, never clamped."""
    times = np.asarray(times, dtype=float)
    vals = n_series(p, l, times)
    bad = (vals < -tol) | (vals > p.Q(l) + tol)
    return times[bad]


@dataclass(frozen=True)
class Appendix2Params:
    """Per-trader detunings ``gamma_l = beta_l - alpha_l`` with mean ``PhiTilde``.

    The closed form holds under ``X_gamma(0) = 0`` and ``2 mu + PhiTilde = 0``
    with ``mu = 2 eta - Qbar``; both are enforced here.
    """

    gamma_l: tuple[float, ...]
    PhiTilde: float
    mu: float
    X0: complex
    n: tuple[float, ...]
    k: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in self.gamma_l)
        n = tuple(float(v) for v in self.n)
        k = tuple(float(v) for v in self.k)
        if not (len(g) == len(n) == len(k)) or not g:
            raise ConfigError("gamma_l, n and k need one entry per trader")
        if min(n) < 0 or min(k) < 0:
            raise ConfigError("n_l and k_l must be non-negative")
        if self.PhiTilde == 0:
            raise ConfigError("PhiTilde must be non-zero")
        if abs(2 * self.mu + self.PhiTilde) > 1e-12 * max(1.0, abs(self.PhiTilde)):
            raise ConfigError("the heterogeneous closed form assumes 2 mu + PhiTilde = 0")
        object.__setattr__(self, "gamma_l", g)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "X0", complex(self.X0))

    @property
    def L(self) -> int:
        return len(self.n)

    def coupling_factor(self) -> float:
        """``mu^2 / PhiTilde^2`` (1/4 under the enforced constraint)."""
        return self.mu ** 2 / self.PhiTilde ** 2

    def omega(self, l: int) -> float:
        return math.sqrt((self.gamma_l[l] + self.PhiTilde) ** 2
                         + 64 * self.coupling_factor() * abs(self.X0) ** 2)


def nl_appendix2(p: Appendix2Params, l: int, t):
    """Shares of trader ``l`` with its own frequency ``omega_l``."""
    w = p.omega(l)
    if w == 0:
        return np.full(np.shape(t), p.n[l], dtype=float)
    coupling2 = 32 * p.coupling_factor() * abs(p.X0) ** 2
    return _oscillation(p.n[l], p.k[l], p.gamma_l[l] + p.PhiTilde, coupling2, w, t)


def portfolio_meanfield(gamma_share: float, n_series_l, n0: float, Pi0: float):
    """``Pi_l(t) = Pi_l(0) + (gamma - 1)(n_l(t) - n_l(0))`` with unit share price."""
    return Pi0 + (gamma_share - 1.0) * (np.asarray(n_series_l, dtype=float) - n0)
