"""Bosonic Fock sectors, sparse ladder operators and exact state evolution.

A sector is the finite set of occupation vectors reachable from an initial
number state under a list of hops.  Every Hamiltonian in this package
conserves enough quantities for that set to be finite, so working inside the
sector is exact: nothing is truncated.

Operators are ``scipy.sparse.csr_array`` matrices over the sector basis and
states are 1-d complex numpy arrays.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from scipy import special

from .errors import NonHermitianError, SectorClosureError, SectorOverflowError

DEFAULT_MAX_DIM = 200_000
DENSE_LIMIT = 4000
HERMITIAN_TOL = 1e-10
REAL_TOL = 1e-10


def max_dim_from_env() -> int:
    """Sector cap, overridable through ``FOCKMARKET_MAX_DIM``."""
    raw = os.environ.get("FOCKMARKET_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    return int(raw)


@dataclass(frozen=True)
class Hop:
    """A number-conserving move: add ``delta[m]`` quanta to mode ``m``.

    Closure uses the hop in both directions, so ``Hop(d)`` and ``Hop(-d)``
    generate the same sector.
    """

    delta: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(int(d) for d in self.delta))


def share_hop(mode_count: int, i: int, j: int, cash_i: int | None = None,
              cash_j: int | None = None, M: int = 0, label: str = "") -> Hop:
    """Hop for ``a_i^dag a_j (c_i)^M (c_j^dag)^M``: one share j -> i, M cash i -> j."""
    if i == j:
        raise ValueError("share hop needs two distinct traders")
    delta = [0] * mode_count
    delta[i] += 1
    delta[j] -= 1
    if M:
        if cash_i is None or cash_j is None:
            raise ValueError("cash modes are required when M > 0")
        delta[cash_i] -= M
        delta[cash_j] += M
    return Hop(tuple(delta), label or f"hop({i}<-{j},M={M})")


def _keys(states: np.ndarray) -> np.ndarray:
    # big-endian unsigned bytes compare lexicographically like the integer tuples
    arr = np.ascontiguousarray(states, dtype=">u8")
    return arr.view(np.dtype((np.void, arr.shape[1] * 8))).ravel()


@dataclass(frozen=True, eq=False)
class FockSector:
    """Lexicographically ordered basis of occupation vectors.

    ``basis[r]`` is the occupation tuple of basis state ``r``; ``lookup``
    is the inverse map, vectorised.
    """

    basis: np.ndarray
    generators: tuple[Hop, ...] = ()
    _keys: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        basis = np.array(self.basis, dtype=np.int64, ndmin=2)
        if basis.size and basis.min() < 0:
            raise ValueError("occupation numbers must be non-negative")
        order = np.lexsort(basis.T[::-1])
        basis = basis[order]
        keys = _keys(basis)
        if len(keys) > 1 and np.any(keys[1:] == keys[:-1]):
            raise ValueError("basis entries must be pairwise distinct")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_keys", keys)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def mode_count(self) -> int:
        return self.basis.shape[1]

    def __len__(self) -> int:
        return self.dim

    def lookup(self, states: np.ndarray) -> np.ndarray:
        """Basis positions of ``states`` (rows); -1 where a row is absent."""
        states = np.atleast_2d(np.asarray(states, dtype=np.int64))
        out = np.full(states.shape[0], -1, dtype=np.int64)
        valid = np.all(states >= 0, axis=1)
        if not valid.any():
            return out
        keys = _keys(states[valid])
        pos = np.searchsorted(self._keys, keys)
        pos_c = np.minimum(pos, self.dim - 1)
        hit = self._keys[pos_c] == keys
        out[np.flatnonzero(valid)[hit]] = pos_c[hit]
        return out

    def index(self, occupation: Sequence[int]) -> int:
        pos = int(self.lookup(np.asarray(occupation)[None, :])[0])
        if pos < 0:
            raise KeyError(f"{tuple(occupation)} is not in the sector")
        return pos

    def basis_state(self, occupation: Sequence[int]) -> np.ndarray:
        """Normalised number state for ``occupation``."""
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(occupation)] = 1.0
        return psi


def enumerate_sector(mode_count: int, initial: Sequence[int],
                     generators: Iterable[Hop] = (),
                     max_dim: int | None = None) -> FockSector:
    """Breadth-first closure of ``{initial}`` under the hops, both directions.

    Raises :class:`SectorOverflowError` once the closure exceeds ``max_dim``
    (default: ``FOCKMARKET_MAX_DIM`` or 200 000).
    """
    initial = np.asarray(initial, dtype=np.int64)
    if initial.shape != (mode_count,):
        raise ValueError(f"initial state must have {mode_count} entries")
    if np.any(initial < 0):
        raise ValueError("initial occupations must be non-negative")
    generators = tuple(generators)
    for g in generators:
        if len(g.delta) != mode_count:
            raise ValueError(f"hop {g.label!r} has wrong length")
    bound = max_dim_from_env() if max_dim is None else int(max_dim)

    deltas = np.array([g.delta for g in generators], dtype=np.int64).reshape(-1, mode_count)
    deltas = np.concatenate([deltas, -deltas])
    seen = initial[None, :]
    seen_keys = _keys(seen)
    frontier = seen
    while frontier.shape[0] and deltas.shape[0]:
        cand = (frontier[:, None, :] + deltas[None, :, :]).reshape(-1, mode_count)
        cand = cand[np.all(cand >= 0, axis=1)]
        if cand.shape[0] == 0:
            break
        ckeys, first = np.unique(_keys(cand), return_index=True)
        pos = np.minimum(np.searchsorted(seen_keys, ckeys), len(seen_keys) - 1)
        new = seen_keys[pos] != ckeys
        frontier = cand[first[new]]
        if seen.shape[0] + frontier.shape[0] > bound:
            raise SectorOverflowError(bound)
        seen = np.concatenate([seen, frontier])
        seen_keys = _keys(seen)
        order = np.argsort(seen_keys, kind="stable")
        seen, seen_keys = seen[order], seen_keys[order]
    if seen.shape[0] > bound:
        raise SectorOverflowError(bound)
    return FockSector(seen, generators)


def _ladder_weight(n: np.ndarray, d: int) -> np.ndarray:
    """sqrt of (n+d)!/n! for d > 0, n!/(n+d)! for d < 0, as exact integer products."""
    w = np.ones(n.shape, dtype=float)
    if d > 0:
        for m in range(1, d + 1):
            w *= n + m
    elif d < 0:
        for m in range(0, -d):
            w *= np.maximum(n - m, 0)
    return np.sqrt(w)


def transition_matrix(sector: FockSector, delta: Sequence[int],
                      strict: bool = True) -> sp.csr_array:
    """Matrix of the ladder monomial that shifts occupations by ``delta``.

    Each positive entry ``d`` stands for ``(a^dag)^d`` on that mode and each
    negative one for ``a^|d|``; the matrix element is the product of the usual
    square-root factors.  Columns whose source lacks the quanta vanish.  With
    ``strict`` a target outside the sector raises :class:`SectorClosureError`,
    otherwise it is dropped.
    """
    delta = np.asarray(delta, dtype=np.int64)
    basis = sector.basis
    target = basis + delta
    ok = np.all(target >= 0, axis=1)
    src = np.flatnonzero(ok)
    rows = sector.lookup(target[ok])
    missing = rows < 0
    if missing.any():
        if strict:
            bad = tuple(int(v) for v in target[ok][missing][0])
            raise SectorClosureError(f"hop lands on {bad}, outside the sector")
        src, rows = src[~missing], rows[~missing]
    vals = np.ones(src.shape[0])
    for m, d in enumerate(delta):
        if d:
            vals *= _ladder_weight(basis[src, m], int(d))
    keep = vals != 0
    return sp.csr_array((vals[keep].astype(complex), (rows[keep], src[keep])),
                        shape=(sector.dim, sector.dim))


def ladder_matrix(sector: FockSector, mode: int, kind: str) -> sp.csr_array:
    """``a`` (``lower``), ``a^dag`` (``raise``) or ``a^dag a`` (``number``) on one mode.

    Raise/lower are restricted to the sector: matrix elements leading out of
    it are dropped, so they are only meaningful inside balanced products.
    """
    if not 0 <= mode < sector.mode_count:
        raise IndexError(f"mode {mode} out of range")
    if kind == "number":
        return number_operator(sector, {mode: 1.0})
    step = {"lower": -1, "raise": 1}.get(kind)
    if step is None:
        raise ValueError(f"unknown ladder kind {kind!r}")
    delta = np.zeros(sector.mode_count, dtype=np.int64)
    delta[mode] = step
    return transition_matrix(sector, delta, strict=False)


def hop_operator(sector: FockSector, i: int, j: int, cash_i: int | None = None,
                 cash_j: int | None = None, M: int = 0) -> sp.csr_array:
    """``a_i^dag a_j (c_i)^M (c_j^dag)^M`` restricted to the sector (exact)."""
    return transition_matrix(sector, share_hop(sector.mode_count, i, j, cash_i, cash_j, M).delta)


def number_operator(sector: FockSector, weights: dict[int, float]) -> sp.csr_array:
    """Diagonal operator ``sum_m w_m n_m``."""
    diag = np.zeros(sector.dim)
    for m, w in weights.items():
        diag += w * sector.basis[:, m]
    return sp.diags_array(diag.astype(complex), format="csr")


def diagonal(op) -> np.ndarray:
    return np.asarray(op.diagonal())


def expectation(state: np.ndarray, op) -> complex:
    """``<state, op state>``."""
    state = np.asarray(state)
    if op.shape != (state.shape[0], state.shape[0]):
        raise ValueError(f"operator shape {op.shape} does not match state of length {state.shape[0]}")
    return complex(np.vdot(state, op @ state))


def as_real(value: complex, tol: float = REAL_TOL) -> float:
    """Drop an imaginary residue below ``tol``; warn if it is larger."""
    if abs(value.imag) >= tol:
        warnings.warn(f"expectation has imaginary part {value.imag:.3e}", RuntimeWarning, stacklevel=2)
    return float(value.real)


def max_abs(op) -> float:
    """Sparse max-norm: largest absolute matrix entry."""
    op = sp.csr_array(op)
    return float(np.abs(op.data).max()) if op.nnz else 0.0


def prune(op, tol: float = 1e-14) -> sp.csr_array:
    op = sp.csr_array(op)
    op.data[np.abs(op.data) < tol] = 0
    op.eliminate_zeros()
    return op


def commutator(a, b, tol: float = 1e-14) -> sp.csr_array:
    """``[a, b]`` with cancelled entries below ``tol`` removed."""
    return prune(a @ b - b @ a, tol)


def hermiticity_defect(op) -> float:
    return max_abs(op - op.conj().T)


def _check_hermitian(H, tol: float = HERMITIAN_TOL) -> None:
    defect = hermiticity_defect(H)
    if defect >= tol:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {defect:.3e})")


def iter_evolve(H, state: np.ndarray, times: Sequence[float],
                dense_limit: int = DENSE_LIMIT) -> Iterator[np.ndarray]:
    """Yield ``exp(-iHt) state`` for each ``t`` in ``times``.

    Sectors up to ``dense_limit`` are diagonalised once; larger ones are
    propagated interval by interval with a Chebyshev expansion.
    """
    _check_hermitian(H)
    state = np.asarray(state, dtype=complex)
    times = np.asarray(times, dtype=float)
    if state.shape[0] <= dense_limit:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H)
        if not np.any(dense.imag):
            dense = dense.real
        energies, vecs = np.linalg.eigh(dense)
        coeff = vecs.conj().T @ state
        for t in times:
            yield vecs @ (np.exp(-1j * energies * t) * coeff)
        return
    step = _ChebyshevStepper(H)
    psi, t_prev = state, 0.0
    for t in times:
        if t != t_prev:
            psi = step(psi, t - t_prev)
            t_prev = t
        yield psi


class _ChebyshevStepper:
    """``psi -> exp(-i H dt) psi`` via a Chebyshev series of the rescaled ``H``.

    A real ``H`` acts on the stacked (re, im) columns so the sparse product
    stays in real arithmetic.
    """

    def __init__(self, H, tol: float = 1e-16):
        H = sp.csr_array(H)
        d = np.real(H.diagonal())
        # Gershgorin discs bound the spectrum
        radius = np.asarray(abs(H).sum(axis=1)).ravel() - np.abs(d)
        lo, hi = float((d - radius).min()), float((d + radius).max())
        self.centre = 0.5 * (hi + lo)
        self.half = max(0.5 * (hi - lo), 1e-300)
        self.real = not (np.iscomplexobj(H.data) and np.any(H.data.imag))
        self.H = sp.csr_array(H.real) if self.real else H
        self.tol = tol

    def _apply(self, v):
        return (self.H @ v - self.centre * v) / self.half

    def __call__(self, psi: np.ndarray, dt: float) -> np.ndarray:
        z = self.half * dt
        v_prev = np.column_stack([psi.real, psi.imag]) if self.real else psi
        v_cur = self._apply(v_prev)
        acc = special.jv(0, z) * v_prev.astype(complex)
        k = 1
        while True:
            jk = special.jv(k, z)
            acc += 2 * (-1j) ** k * jk * v_cur
            if k > abs(z) and abs(jk) < self.tol:
                break
            v_prev, v_cur = v_cur, 2 * self._apply(v_cur) - v_prev
            k += 1
        if self.real:
            acc = acc[:, 0] + 1j * acc[:, 1]
        return np.exp(-1j * self.centre * dt) * acc


def evolve_exact(H, state: np.ndarray, times: Sequence[float],
                 dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """States ``exp(-iHt) state`` stacked as rows, one per time."""
    return np.array(list(iter_evolve(H, state, times, dense_limit)))


def diagonal_expectations(H, state: np.ndarray, times: Sequence[float],
                          observables: np.ndarray,
                          dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Expectations of diagonal observables along the exact evolution.

    ``observables`` has shape ``(dim, k)``: column ``c`` is the diagonal of
    observable ``c``.  Returns shape ``(len(times), k)``.  States are not
    stored, which keeps large sectors affordable.
    """
    obs = np.asarray(observables, dtype=float)
    H = sp.csr_array(H)
    if H.nnz == np.count_nonzero(H.diagonal()):
        # diagonal H: populations are stationary, skip the rounding of phases
        _check_hermitian(H)
        row = np.abs(np.asarray(state)) ** 2 @ obs
        return np.tile(row, (len(times), 1)).reshape(len(times), obs.shape[1])
    out = [np.abs(psi) ** 2 @ obs for psi in iter_evolve(H, state, times, dense_limit)]
    return np.array(out).reshape(len(out), obs.shape[1])
