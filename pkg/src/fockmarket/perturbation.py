"""Short-time Heisenberg series and the second-order two-trader formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OrderLimitError
from .fock import as_real, commutator, expectation, max_abs
from .hamiltonians import ModelTwoConfig

MAX_ORDER = 12


@dataclass(frozen=True)
class SeriesResult:
    """Taylor coefficients of ``<X(t)>`` around ``t = 0``.

    ``coefficients[n]`` is ``<i^n [H, X]_n> / n!``.
    """

    coefficients: np.ndarray
    order: int
    radius_hint: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for c in self.coefficients[::-1]:
            out = out * t + c
        return out

    def real(self, t) -> np.ndarray:
        return np.real(self(t))


def nested_commutators(H, X, order: int):
    """``[H, X]_0 = X``, ``[H, X]_{n+1} = [H, [H, X]_n]`` for n up to ``order``."""
    terms = [X]
    for _ in range(order):
        terms.append(commutator(H, terms[-1]))
    return terms


def heisenberg_series(H, X, state: np.ndarray, order: int) -> SeriesResult:
    """Expectation of ``exp(iHt) X exp(-iHt)`` expanded to ``t**order``."""
    if order > MAX_ORDER:
        raise OrderLimitError(f"series order {order} exceeds the limit of {MAX_ORDER}")
    if order < 0:
        raise ValueError("order must be non-negative")
    if H.shape != X.shape or H.shape[0] != len(state):
        raise ValueError("H, X and state dimensions differ")
    coeffs = [(1j ** n) * expectation(state, C) / math.factorial(n)
              for n, C in enumerate(nested_commutators(H, X, order))]
    norm = max_abs(H)
    return SeriesResult(np.array(coeffs), order, 1.0 / norm if norm > 0 else math.inf)


@dataclass(frozen=True)
class EpsilonPair:
    eps_plus: float
    eps_minus: float

    @property
    def drive(self) -> float:
        """``eps_plus^2 - eps_minus^2``; positive when trader 1 tends to buy."""
        return self.eps_plus ** 2 - self.eps_minus ** 2


def _falling(k: int, M: int) -> int:
    """k!/(k-M)!, zero when k < M."""
    return math.perm(k, M) if k >= M else 0


def epsilon_pair(n1: int, n2: int, k1: int, k2: int, M: int) -> EpsilonPair:
    """Matrix elements of the buy (``+``) and sell (``-``) moves of trader 1.

    A side whose buyer cannot pay ``M`` (``k - M < 0``) gives zero.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if min(n1, n2, k1, k2) < 0:
        raise ValueError("occupations must be non-negative")
    plus = (n1 + 1) * n2 * _falling(k1, M) * _falling(k2 + M, M)
    minus = (n2 + 1) * n1 * _falling(k1 + M, M) * _falling(k2, M)
    return EpsilonPair(math.sqrt(plus), math.sqrt(minus))


def second_order_two_traders(cfg: ModelTwoConfig, t):
    """Small-``t`` shares, cash and portfolio of both traders.

    Returns a dict with ``n_1, k_1, Pi_1, n_2, k_2, Pi_2`` evaluated at ``t``
    (scalar or array), valid through order ``t**3``.
    """
    if cfg.L != 2:
        raise ValueError("the two-trader formulas need L = 2")
    n1, n2 = cfg.initial_n
    k1, k2 = cfg.initial_k
    M, gamma = cfg.price_M, cfg.gamma_share
    shift = cfg.coupling[0, 1] ** 2 * epsilon_pair(n1, n2, k1, k2, M).drive * np.asarray(t, dtype=float) ** 2
    Pi1, Pi2 = cfg.portfolio0()
    return {
        "n_1": n1 + shift,
        "k_1": k1 - M * shift,
        "Pi_1": Pi1 + (gamma - M) * shift,
        "n_2": n2 - shift,
        "k_2": k2 + M * shift,
        "Pi_2": Pi2 - (gamma - M) * shift,
    }


def series_channel(H, X, state, order: int, times) -> np.ndarray:
    """Real part of a truncated series on a grid, imaginary residue checked."""
    res = heisenberg_series(H, X, state, order)
    for c in res.coefficients:
        as_real(complex(c))
    return res.real(times)
