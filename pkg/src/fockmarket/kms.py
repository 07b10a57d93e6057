"""Thermal (KMS) equilibrium of a single trader's share/cash pair.

With a factorised state and ``X0 = 0`` the equilibrium condition reads
``exp(beta Phi) = n_a (1 + n_c) / (n_c (1 + n_a))`` and the budget
``n_a + n_c = Q_l`` is conserved.  Occupations are thermal expectations, so
they are real, not integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError

CASE_LABELS = ("ia", "ib", "ic", "ii-with", "ii-without", "iiia", "iiib", "iiic")

# Outcome per (sign of Phi, relation of n_a to n_c)
OUTCOMES = {
    ("+", ">"): ("ia", "solution"),
    ("+", "="): ("ib", "beta-zero"),
    ("+", "<"): ("ic", "none"),
    ("0", ">"): ("ii-without", "none"),
    ("0", "="): ("ii-with", "solution"),
    ("0", "<"): ("ii-without", "none"),
    ("-", ">"): ("iiia", "none"),
    ("-", "="): ("iiib", "beta-zero"),
    ("-", "<"): ("iiic", "solution"),
}


def kms_rhs(n_a: float, n_c: float) -> float:
    """``n_a (1 + n_c) / (n_c (1 + n_a))``."""
    if n_c <= 0:
        raise ZeroDivisionError("KMS ratio is undefined for n_c = 0")
    if n_a < 0:
        raise ValueError("n_a must be non-negative")
    return n_a * (1 + n_c) / (n_c * (1 + n_a))


@dataclass(frozen=True)
class KmsProblem:
    Phi: float
    Q_l: float
    mode: str = "solve_pair"
    beta: float | None = None
    n_a: float | None = None
    n_c: float | None = None

    def __post_init__(self):
        if not self.Q_l > 0:
            raise ConfigError("Q_l must be positive")
        if self.mode not in ("solve_beta_given_nc", "solve_pair", "classify"):
            raise ConfigError(f"unknown KMS mode {self.mode!r}")
        for name in ("n_a", "n_c"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.beta is not None and self.beta < 0:
            raise ConfigError("beta must be non-negative")


@dataclass(frozen=True)
class KmsSolution:
    case_label: str
    outcome: str
    beta0: float | None = None
    nc0: float | None = None
    na0: float | None = None


def _sign(x: float) -> str:
    return "+" if x > 0 else "-" if x < 0 else "0"


def _relation(n_a: float, n_c: float) -> str:
    return ">" if n_a > n_c else "<" if n_a < n_c else "="


def classify(Phi: float, n_a: float, n_c: float) -> tuple[str, str]:
    """Case label and outcome (``solution``, ``beta-zero`` or ``none``)."""
    return OUTCOMES[(_sign(Phi), _relation(n_a, n_c))]


def _budget_split(Q: float, n_c: float) -> tuple[float, float]:
    # second subtraction is exact (Sterbenz), so n_a + n_c == Q in floating point
    n_a = Q - n_c
    n_c = Q - n_a
    return n_a, n_c


def _log_ratio_on_budget(Q: float, n_c: float) -> float:
    n_a = Q - n_c
    return math.log(n_a) + math.log1p(n_c) - math.log(n_c) - math.log1p(n_a)


def solve_nc(Q: float, target_log: float, tol: float = 1e-12, max_iter: int = 400) -> float:
    """Root of ``log kms_rhs(Q - n_c, n_c) = target_log`` by bisection on ``(0, Q)``.

    The map is strictly decreasing in ``n_c``; the bracket is
    ``[1e-12 Q, Q - 1e-12 Q]``.
    """
    delta = 1e-12 * Q
    lo, hi = delta, Q - delta
    f_lo = _log_ratio_on_budget(Q, lo) - target_log
    f_hi = _log_ratio_on_budget(Q, hi) - target_log
    if f_lo < 0 or f_hi > 0:
        raise ValueError("target outside the attainable range on the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = _log_ratio_on_budget(Q, mid) - target_log
        if abs(f_mid) <= tol * 1e-3 or hi - lo <= 2 * math.ulp(mid):
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_equilibrium(problem: KmsProblem) -> KmsSolution:
    """Equilibrium on the budget curve ``n_a = Q_l - n_c``.

    ``solve_pair``: given ``beta`` find ``n_c``.  ``solve_beta_given_nc``:
    given ``n_c`` find ``beta``.  ``classify``: given ``n_a`` and ``n_c``
    report the case and, where one exists, ``beta``.
    """
    Phi, Q = problem.Phi, problem.Q_l
    if problem.mode == "solve_pair":
        if problem.beta is None:
            raise ConfigError("solve_pair needs beta")
        target = problem.beta * Phi
        n_c = solve_nc(Q, target)
        n_a, n_c = _budget_split(Q, n_c)
        if problem.beta == 0 or Phi == 0:
            n_a = n_c = Q / 2
        label, outcome = classify(Phi, n_a, n_c)
        return KmsSolution(label, outcome, problem.beta, n_c, n_a)

    if problem.mode == "solve_beta_given_nc":
        if problem.n_c is None:
            raise ConfigError("solve_beta_given_nc needs n_c")
        if not 0 < problem.n_c < Q:
            raise ConfigError("n_c must lie strictly inside (0, Q_l)")
        n_a, n_c = _budget_split(Q, problem.n_c)
    else:
        if problem.n_a is None or problem.n_c is None:
            raise ConfigError("classify needs n_a and n_c")
        n_a, n_c = problem.n_a, problem.n_c
    label, outcome = classify(Phi, n_a, n_c)
    beta0 = None
    if outcome == "solution" and Phi != 0:
        beta0 = math.log(kms_rhs(n_a, n_c)) / Phi
    elif outcome == "beta-zero":
        beta0 = 0.0
    return KmsSolution(label, outcome, beta0, n_c, n_a)


def nc_quadratic(Q: float, target: float) -> float:
    """Closed-form root of ``(T-1) n^2 + (Q - 1 - T(1+Q)) n + Q = 0`` in ``(0, Q)``."""
    a = target - 1.0
    b = Q - 1.0 - target * (1.0 + Q)
    if a == 0:
        return -Q / b
    # stable form: q carries the sign of b, roots are q/a and Q/q
    q = -0.5 * (b + math.copysign(math.sqrt(b * b - 4 * a * Q), b))
    roots = [q / a, Q / q]
    inside = [r for r in roots if 0 < r < Q]
    return inside[0]


def equilibrium_portfolio(gamma_share: float, k0: float, nc0: float, Pi0: float) -> float:
    """Portfolio once the equilibrium cash ``nc0`` is reached."""
    return Pi0 + (gamma_share - 1.0) * (k0 - nc0)


def rhs_spread(n_a: Sequence[float], n_c: Sequence[float]) -> float:
    """Max minus min of the KMS ratio across traders; zero when l-independent."""
    vals = np.array([kms_rhs(a, c) for a, c in zip(n_a, n_c)])
    return float(vals.max() - vals.min())


def check_l_independence(n_a: Sequence[float], n_c: Sequence[float],
                         tol: float = 1e-10) -> list[int]:
    """Traders whose ratio differs from trader 0's by more than ``tol`` (relative)."""
    ref = kms_rhs(n_a[0], n_c[0])
    return [i for i, (a, c) in enumerate(zip(n_a, n_c))
            if abs(kms_rhs(a, c) - ref) > tol * abs(ref)]
