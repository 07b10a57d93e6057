"""Model I (shares + frozen price) and model II (shares, cash, supply, price).

Mode layout.  Model I: ``a_1..a_L`` at 0..L-1, price ``p`` at L.
Model II: ``a_1..a_L`` at 0..L-1, cash ``c_1..c_L`` at L..2L-1,
supply ``o`` at 2L, price ``p`` at 2L+1.

Each unordered trader pair ``i<j`` with ``p_ij != 0`` contributes one hop and
its adjoint with amplitude ``p_ij``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .fock import (FockSector, Hop, enumerate_sector, number_operator, share_hop,
                   transition_matrix)


def _check_coupling(p, L: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (L, L):
        raise ConfigError(f"coupling matrix must be {L}x{L}, got {p.shape}")
    if not np.allclose(p, p.T, rtol=0, atol=0):
        raise ConfigError("coupling matrix p must be symmetric")
    if np.any(np.diag(p) != 0):
        raise ConfigError("coupling matrix p must have a zero diagonal")
    if np.any(p < 0):
        raise ConfigError("coupling matrix p must be non-negative")
    return p


def _nonneg_ints(values, name: str, L: int) -> tuple[int, ...]:
    vals = tuple(int(v) for v in values)
    if len(vals) != L:
        raise ConfigError(f"{name} must have {L} entries")
    if any(v < 0 for v in vals) or any(int(v) != v for v in values):
        raise ConfigError(f"{name} must hold non-negative integers")
    return vals


def _as_matrix(p) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in row) for row in np.asarray(p, dtype=float))


@dataclass(frozen=True)
class ModelOneConfig:
    alpha: tuple[float, ...]
    p: tuple[tuple[float, ...], ...]
    initial_n: tuple[int, ...]
    price_M: int = 0
    epsilon: float = 1.0

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        L = len(alpha)
        if L < 1:
            raise ConfigError("model one needs at least one trader")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "p", _as_matrix(_check_coupling(self.p, L)))
        object.__setattr__(self, "initial_n", _nonneg_ints(self.initial_n, "initial_n", L))
        if int(self.price_M) != self.price_M or self.price_M < 0:
            raise ConfigError("price_M must be a non-negative integer")
        object.__setattr__(self, "price_M", int(self.price_M))
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")

    @property
    def L(self) -> int:
        return len(self.alpha)

    @property
    def coupling(self) -> np.ndarray:
        return np.array(self.p)

    @property
    def mode_count(self) -> int:
        return self.L + 1

    @property
    def price_mode(self) -> int:
        return self.L

    def initial_occupation(self) -> tuple[int, ...]:
        return self.initial_n + (self.price_M,)


@dataclass(frozen=True)
class ModelTwoConfig:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    p: tuple[tuple[float, ...], ...]
    price_M: int
    initial_n: tuple[int, ...]
    initial_k: tuple[int, ...]
    initial_O: int = 0
    initial_Mp: int = 0
    gamma_share: float = 1.0

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        L = len(alpha)
        if L < 1:
            raise ConfigError("model two needs at least one trader")
        beta = tuple(float(b) for b in self.beta)
        if len(beta) != L:
            raise ConfigError(f"beta must have {L} entries")
        if int(self.price_M) != self.price_M or self.price_M <= 0:
            raise ConfigError("price_M (M) must be a positive integer")
        for name in ("initial_O", "initial_Mp"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer")
            object.__setattr__(self, name, int(v))
        if not self.gamma_share > 0:
            raise ConfigError("gamma_share must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "p", _as_matrix(_check_coupling(self.p, L)))
        object.__setattr__(self, "price_M", int(self.price_M))
        object.__setattr__(self, "initial_n", _nonneg_ints(self.initial_n, "initial_n", L))
        object.__setattr__(self, "initial_k", _nonneg_ints(self.initial_k, "initial_k", L))

    @property
    def L(self) -> int:
        return len(self.alpha)

    @property
    def coupling(self) -> np.ndarray:
        return np.array(self.p)

    @property
    def mode_count(self) -> int:
        return 2 * self.L + 2

    def cash_mode(self, l: int) -> int:
        return self.L + l

    @property
    def supply_mode(self) -> int:
        return 2 * self.L

    @property
    def price_mode(self) -> int:
        return 2 * self.L + 1

    def initial_occupation(self) -> tuple[int, ...]:
        return self.initial_n + self.initial_k + (self.initial_O, self.initial_Mp)

    def Q(self) -> np.ndarray:
        """Initial values of the conserved ``n_j + k_j / M``."""
        return np.array(self.initial_n) + np.array(self.initial_k) / self.price_M

    def portfolio0(self) -> np.ndarray:
        return self.gamma_share * np.array(self.initial_n) + np.array(self.initial_k)


@dataclass(frozen=True)
class ExtraTerm:
    """``strength * (T + T^dag)`` for the ladder monomial shifting by ``delta``.

    Used to deliberately break a conservation law (negative controls).
    """

    delta: tuple[int, ...]
    strength: float = 1.0

    def hop(self) -> Hop:
        return Hop(tuple(self.delta), "extra")


def _pairs(p: np.ndarray):
    L = p.shape[0]
    for i in range(L):
        for j in range(i + 1, L):
            if p[i, j] != 0:
                yield i, j


def model1_hops(cfg: ModelOneConfig) -> list[Hop]:
    return [share_hop(cfg.mode_count, i, j) for i, j in _pairs(cfg.coupling)]


def model2_hops(cfg: ModelTwoConfig) -> list[Hop]:
    hops = [share_hop(cfg.mode_count, i, j, cfg.cash_mode(i), cfg.cash_mode(j), cfg.price_M)
            for i, j in _pairs(cfg.coupling)]
    delta = [0] * cfg.mode_count
    delta[cfg.supply_mode], delta[cfg.price_mode] = 1, -1
    hops.append(Hop(tuple(delta), "supply<->price"))
    return hops


def model1_sector(cfg: ModelOneConfig, extra: Sequence[ExtraTerm] = (),
                  max_dim: int | None = None) -> FockSector:
    hops = model1_hops(cfg) + [e.hop() for e in extra]
    return enumerate_sector(cfg.mode_count, cfg.initial_occupation(), hops, max_dim)


def model2_sector(cfg: ModelTwoConfig, extra: Sequence[ExtraTerm] = (),
                  max_dim: int | None = None) -> FockSector:
    hops = model2_hops(cfg) + [e.hop() for e in extra]
    return enumerate_sector(cfg.mode_count, cfg.initial_occupation(), hops, max_dim)


def _add_extra(H, sector: FockSector, extra: Sequence[ExtraTerm]):
    for e in extra:
        T = transition_matrix(sector, e.delta)
        H = H + e.strength * (T + T.conj().T)
    return sp.csr_array(H)


def build_model1(cfg: ModelOneConfig, sector: FockSector,
                 extra: Sequence[ExtraTerm] = ()) -> sp.csr_array:
    """``sum alpha_l n_l + sum_{i<j} p_ij (a_i^dag a_j + h.c.) + eps p^dag p``."""
    weights = {l: cfg.alpha[l] for l in range(cfg.L)}
    weights[cfg.price_mode] = cfg.epsilon
    H = number_operator(sector, weights)
    p = cfg.coupling
    for i, j in _pairs(p):
        T = transition_matrix(sector, share_hop(cfg.mode_count, i, j).delta)
        H = H + p[i, j] * (T + T.conj().T)
    return _add_extra(H, sector, extra)


def build_model2(cfg: ModelTwoConfig, sector: FockSector,
                 extra: Sequence[ExtraTerm] = ()) -> sp.csr_array:
    """Effective Hamiltonian with M-unit cash transfers and the supply/price exchange."""
    weights = {l: cfg.alpha[l] for l in range(cfg.L)}
    weights.update({cfg.cash_mode(l): cfg.beta[l] for l in range(cfg.L)})
    weights[cfg.supply_mode] = 1.0
    weights[cfg.price_mode] = 1.0
    H = number_operator(sector, weights)
    p = cfg.coupling
    for i, j in _pairs(p):
        hop = share_hop(cfg.mode_count, i, j, cfg.cash_mode(i), cfg.cash_mode(j), cfg.price_M)
        T = transition_matrix(sector, hop.delta)
        H = H + p[i, j] * (T + T.conj().T)
    delta = np.zeros(cfg.mode_count, dtype=np.int64)
    delta[cfg.supply_mode], delta[cfg.price_mode] = 1, -1
    T = transition_matrix(sector, delta)
    H = H + T + T.conj().T
    return _add_extra(H, sector, extra)


def conserved_set(model: str, cfg, sector: FockSector) -> dict[str, sp.csr_array]:
    """Integrals of motion as diagonal operators.

    Model one: ``N``.  Model two: ``N``, ``K``, ``Gamma`` and ``Q_1..Q_L``.
    The ladder-type ``o - p`` is not Hermitian and is left out.
    """
    L = cfg.L
    ops = {"N": number_operator(sector, {l: 1.0 for l in range(L)})}
    if model in ("one", "model1"):
        return ops
    if model not in ("two", "model2"):
        raise ValueError(f"unknown model {model!r}")
    ops["K"] = number_operator(sector, {cfg.cash_mode(l): 1.0 for l in range(L)})
    ops["Gamma"] = number_operator(sector, {cfg.supply_mode: 1.0, cfg.price_mode: 1.0})
    for l in range(L):
        ops[f"Q_{l + 1}"] = number_operator(sector, {l: 1.0, cfg.cash_mode(l): 1.0 / cfg.price_M})
    return ops


def initial_state(cfg, sector: FockSector) -> np.ndarray:
    return sector.basis_state(cfg.initial_occupation())
