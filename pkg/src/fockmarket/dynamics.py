"""Closed-form and one-body solutions for models I and II.

Model I is quadratic, so ``a(t) = W(t) a(0)`` with ``W(t) = exp(-iXt)`` and
occupations on number states follow from ``|W_jl|^2`` alone.  The
exact-diagonalisation routines in :mod:`fockmarket.fock` serve as the oracle
for everything here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hamiltonians as ham
from .fock import (Hop, diagonal_expectations, enumerate_sector, number_operator,
                   transition_matrix)
from .hamiltonians import ModelOneConfig, ModelTwoConfig


@dataclass
class TimeSeries:
    """A time grid plus named channels of equal length."""

    times: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def select(self, names: Sequence[str]) -> "TimeSeries":
        return TimeSeries(self.times, {n: self.channels[n] for n in names})


def one_body_matrix(cfg: ModelOneConfig) -> np.ndarray:
    """Hermitian ``X`` of ``i da/dt = X a``: ``alpha`` on the diagonal, ``X[l, m] = p[m, l]``."""
    X = cfg.coupling.T.astype(float).copy()
    np.fill_diagonal(X, cfg.alpha)
    return X


@dataclass(frozen=True)
class OneBodyPropagator:
    X: np.ndarray
    eigenvalues: np.ndarray
    V: np.ndarray

    @classmethod
    def from_matrix(cls, X: np.ndarray) -> "OneBodyPropagator":
        X = np.asarray(X)
        x, V = np.linalg.eigh(X)
        return cls(X, x, V)

    @classmethod
    def from_config(cls, cfg: ModelOneConfig) -> "OneBodyPropagator":
        return cls.from_matrix(one_body_matrix(cfg))

    def W(self, t: float) -> np.ndarray:
        """``V exp(-i x t) V^dag``, the Heisenberg propagator of the annihilators."""
        return (self.V * np.exp(-1j * self.eigenvalues * t)) @ self.V.conj().T

    def natural_period(self) -> float:
        """``2 pi`` over the one-body bandwidth (inf when it vanishes)."""
        width = self.eigenvalues.max() - self.eigenvalues.min()
        return 2 * math.pi / width if width > 0 else math.inf


def occupations_from_propagator(prop: OneBodyPropagator, n0: Sequence[float],
                                times: Sequence[float]) -> np.ndarray:
    """``n_j(t) = sum_l |W_jl(t)|^2 n_l(0)``, shape ``(len(times), L)``."""
    n0 = np.asarray(n0, dtype=float)
    return np.array([np.abs(prop.W(t)) ** 2 @ n0 for t in times])


def two_trader_closed_form(alpha_diff: float, p: float, n1: float, n2: float, t):
    """Two-trader occupations; ``Omega^2 = alpha^2 + 4 p^2``.

    ``t`` may be an array.  Returns ``(n1(t), n2(t))``.
    """
    t = np.asarray(t, dtype=float)
    omega2 = alpha_diff ** 2 + 4 * p ** 2
    if omega2 == 0:
        return np.full_like(t, n1, dtype=float), np.full_like(t, n2, dtype=float)
    c = np.cos(math.sqrt(omega2) * t)
    q = 2 * p ** 2 / omega2
    n1t = (n1 * (alpha_diff ** 2 + 2 * p ** 2 * (1 + c)) + 2 * p ** 2 * n2 * (1 - c)) / omega2
    n2t = q * n1 * (1 - c) + n2 * (1 + q * (c - 1))
    return n1t, n2t


def two_trader_period(alpha_diff: float, p: float) -> float:
    omega2 = alpha_diff ** 2 + 4 * p ** 2
    return 2 * math.pi / math.sqrt(omega2) if omega2 > 0 else math.inf


def price_supply_solution(O_f0: float, P_r0: float, times):
    """Mean price and supply quanta under ``o^dag o + p^dag p + o^dag p + p^dag o``.

    Returns ``(P_r(t), O_f(t))``.
    """
    if O_f0 < 0 or P_r0 < 0:
        raise ValueError("supply and price quanta must be non-negative")
    c = np.cos(2 * np.asarray(times, dtype=float))
    total = float(P_r0 + O_f0)
    diff = float(P_r0 - O_f0)
    # the larger of the pair lies in [total/2, total], so total - larger is exact
    # (Sterbenz) and the two always sum to total in floating point
    larger = 0.5 * (total + np.abs(diff * c))
    smaller = total - larger
    price_up = diff * c >= 0
    return np.where(price_up, larger, smaller), np.where(price_up, smaller, larger)


def effective_price(O_f0: float, P_r0: float) -> int:
    """Integer M from the time average of the price, ties rounded up."""
    if O_f0 < 0 or P_r0 < 0:
        raise ValueError("supply and price quanta must be non-negative")
    return int(math.floor((P_r0 + O_f0) / 2 + 0.5))


@dataclass
class PortfolioSeries:
    times: np.ndarray
    Pi: np.ndarray
    n: np.ndarray
    k: np.ndarray


def portfolio_series(gamma_share: float, M: int, n_series: np.ndarray, n0, Pi0,
                     times=None) -> PortfolioSeries:
    """Portfolio ``Pi_j = gamma n_j + k_j`` from share counts alone.

    Uses conservation of ``n_j + k_j / M``: ``k_j(t) = k_j - M (n_j(t) - n_j)``.
    ``n_series`` has shape ``(T, L)``; ``n0`` and ``Pi0`` have length L.
    """
    n_series = np.asarray(n_series, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    Pi0 = np.asarray(Pi0, dtype=float)
    dn = n_series - n0
    k0 = Pi0 - gamma_share * n0
    if times is None:
        times = np.arange(n_series.shape[0], dtype=float)
    return PortfolioSeries(np.asarray(times), Pi0 + (gamma_share - M) * dn, n_series, k0 - M * dn)


def model1_series(cfg: ModelOneConfig, times, method: str = "onebody",
                  extra=(), max_dim: int | None = None) -> TimeSeries:
    """Channels ``n_1..n_L``, ``P`` (price) and ``N`` for model I."""
    times = np.asarray(times, dtype=float)
    L = cfg.L
    if method == "onebody":
        if extra:
            raise ValueError("extra terms need the exact method")
        n = occupations_from_propagator(OneBodyPropagator.from_config(cfg), cfg.initial_n, times)
        price = np.full(times.shape, cfg.epsilon * cfg.price_M)
    elif method == "exact":
        sector = ham.model1_sector(cfg, extra, max_dim)
        H = ham.build_model1(cfg, sector, extra)
        obs = np.column_stack([sector.basis[:, :L], cfg.epsilon * sector.basis[:, L]])
        vals = diagonal_expectations(H, ham.initial_state(cfg, sector), times, obs)
        n, price = vals[:, :L], vals[:, L]
    else:
        raise ValueError(f"model1 supports methods 'onebody' and 'exact', not {method!r}")
    ch = {f"n_{l + 1}": n[:, l] for l in range(L)}
    ch["P"] = price
    ch["N"] = n.sum(axis=1)
    return TimeSeries(times, ch)


def model2_channels(cfg: ModelTwoConfig, n: np.ndarray, k: np.ndarray,
                    O_f: np.ndarray, P_r: np.ndarray) -> dict[str, np.ndarray]:
    L, M = cfg.L, cfg.price_M
    ch: dict[str, np.ndarray] = {}
    for l in range(L):
        ch[f"n_{l + 1}"] = n[:, l]
    for l in range(L):
        ch[f"k_{l + 1}"] = k[:, l]
    for l in range(L):
        ch[f"Pi_{l + 1}"] = cfg.gamma_share * n[:, l] + k[:, l]
    for l in range(L):
        ch[f"Q_{l + 1}"] = n[:, l] + k[:, l] / M
    ch["O_f"] = O_f
    ch["P_r"] = P_r
    ch["N"] = n.sum(axis=1)
    ch["K"] = k.sum(axis=1)
    return ch


def model2_series(cfg: ModelTwoConfig, times, extra=(),
                  max_dim: int | None = None) -> TimeSeries:
    """Exact model II channels from sector diagonalisation."""
    times = np.asarray(times, dtype=float)
    L = cfg.L
    sector = ham.model2_sector(cfg, extra, max_dim)
    H = ham.build_model2(cfg, sector, extra)
    vals = diagonal_expectations(H, ham.initial_state(cfg, sector), times, sector.basis.astype(float))
    n, k = vals[:, :L], vals[:, L:2 * L]
    return TimeSeries(times, model2_channels(cfg, n, k, vals[:, 2 * L], vals[:, 2 * L + 1]))


def price_supply_operator(O: int, P: int):
    """Sector, ``h_po`` and initial state for the supply/price pair alone."""
    sector = enumerate_sector(2, (O, P), [Hop((1, -1), "supply<->price")])
    T = transition_matrix(sector, (1, -1))
    h = number_operator(sector, {0: 1.0, 1: 1.0}) + T + T.conj().T
    return sector, h, sector.basis_state((O, P))
