"""Dense enumeration of the permutation and exclusion state spaces.

States are indexed 0..size-1 in lexicographic order of their tuple encoding
(one-line notation for permutations, occupancy vectors for particle
configurations).  Enumeration refuses spaces larger than a cap (default 5e6
states, overridable through the SHUFFLECUT_STATE_CAP environment variable)
with an error naming the exact size, instead of attempting the allocation.

The adjacent-swap move tables returned by :meth:`StateSpaceIndex.swap_tables`
drive all exact evolution: entry ``[j, x-1]`` is the index of state j with the
contents of positions x, x+1 exchanged (equal to j itself when the exchange
does nothing, which keeps censored or lazy moves as self loops).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StateSpaceIndex",
    "StateCapExceeded",
    "at_space",
    "sep_space",
    "state_cap",
    "sep_flip_reflect",
    "at_to_sep_projection",
    "at_reversal_conjugation",
    "DEFAULT_STATE_CAP",
    "STATE_CAP_ENV",
]

DEFAULT_STATE_CAP = 5_000_000
STATE_CAP_ENV = "SHUFFLECUT_STATE_CAP"


class StateCapExceeded(RuntimeError):
    def __init__(self, label: str, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"{label} has {size} states, above the cap of {cap}; "
            f"raise {STATE_CAP_ENV} to override")


def state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    return int(raw) if raw else DEFAULT_STATE_CAP


def _binomials(n: int) -> np.ndarray:
    c = np.zeros((n + 1, n + 1), dtype=np.int64)
    c[:, 0] = 1
    for i in range(1, n + 1):
        c[i, 1:] = c[i - 1, 1:] + c[i - 1, :-1]
    return c


@dataclass
class StateSpaceIndex:
    """Bijection between states and dense indices for one model instance."""

    model: str  # "at" (permutations) or "sep" (k-particle occupancies)
    n: int
    k: int | None
    states: np.ndarray  # (size, n) int8; labels 1..n for "at", 0/1 for "sep"
    _swap_tables: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def index_of(self, state: tuple[int, ...]) -> int:
        if self.model == "at":
            return _at_rank_rows(np.asarray(state, dtype=np.int64)[None, :])[0]
        return _sep_rank_rows(np.asarray(state, dtype=np.int64)[None, :])[0]

    def state(self, index: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.states[index])

    def swap_tables(self) -> np.ndarray:
        """(size, n-1) int32: index after exchanging positions x, x+1 (column x-1)."""
        if self._swap_tables is None:
            if self.model == "at":
                self._swap_tables = _at_swap_tables(self.states)
            else:
                self._swap_tables = _sep_swap_tables(self.states, self.k)
        return self._swap_tables

    def free_tables(self) -> None:
        self._swap_tables = None


def at_space(n: int) -> StateSpaceIndex:
    """All n! permutations in lexicographic one-line order (identity first)."""
    size = math.factorial(n)
    cap = state_cap()
    if size > cap:
        raise StateCapExceeded(f"permutation space n={n}", size, cap)
    import itertools

    states = np.fromiter(
        (v for line in itertools.permutations(range(1, n + 1)) for v in line),
        dtype=np.int8, count=size * n).reshape(size, n)
    return StateSpaceIndex(model="at", n=n, k=None, states=states)


def sep_space(n: int, k: int) -> StateSpaceIndex:
    """All C(n,k) occupancy vectors in lexicographic order.

    The bottom extremal configuration (particles packed right) is index 0 and
    the top one (particles packed left) is index size-1.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    size = math.comb(n, k)
    cap = state_cap()
    if size > cap:
        raise StateCapExceeded(f"exclusion space n={n}, k={k}", size, cap)
    import itertools

    states = np.zeros((size, n), dtype=np.int8)
    pos = np.fromiter(
        (p for combo in itertools.combinations(range(n), k) for p in combo),
        dtype=np.int64, count=size * k).reshape(size, k)
    # occupancy lex order is the reverse of position-combination lex order
    states[np.arange(size)[:, None], pos] = 1
    states = states[::-1].copy()
    return StateSpaceIndex(model="sep", n=n, k=k, states=states)


def _at_rank_rows(rows: np.ndarray) -> np.ndarray:
    """Lexicographic rank of permutation rows via inversion counts."""
    m, n = rows.shape
    fact = np.array([math.factorial(i) for i in range(n)], dtype=np.int64)
    ranks = np.zeros(m, dtype=np.int64)
    for i in range(n - 1):
        smaller_after = (rows[:, i + 1:] < rows[:, i:i + 1]).sum(axis=1)
        ranks += smaller_after.astype(np.int64) * fact[n - 1 - i]
    return ranks


def _sep_rank_rows(rows: np.ndarray) -> np.ndarray:
    """Lexicographic rank of occupancy rows.

    rank = sum over occupied positions p (1-based) of C(n-p, r_p), where r_p
    counts the particles at positions >= p.
    """
    m, n = rows.shape
    binom = _binomials(n)
    suffix = np.cumsum(rows[:, ::-1], axis=1)[:, ::-1]  # r_p at column p-1
    ranks = np.zeros(m, dtype=np.int64)
    for p in range(1, n + 1):
        occ = rows[:, p - 1] == 1
        ranks[occ] += binom[n - p, suffix[occ, p - 1]]
    return ranks


def _at_swap_tables(states: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    size, n = states.shape
    out = np.empty((size, n - 1), dtype=np.int32)
    for lo in range(0, size, chunk):
        hi = min(lo + chunk, size)
        block = states[lo:hi].astype(np.int64)
        for x in range(n - 1):
            swapped = block.copy()
            swapped[:, [x, x + 1]] = swapped[:, [x + 1, x]]
            out[lo:hi, x] = _at_rank_rows(swapped)
    return out


def _sep_swap_tables(states: np.ndarray, k: int) -> np.ndarray:
    """Vectorized by rank increments: moving a particle one site right, with r
    particles at or after its position p (1-based), changes the rank by
    -C(n-p-1, r-1); moving left is the exact inverse."""
    size, n = states.shape
    binom = _binomials(n)
    prefix = np.zeros((size, n), dtype=np.int64)  # particles strictly before column q
    np.cumsum(states[:, :-1], axis=1, out=prefix[:, 1:], dtype=np.int64)
    base = np.arange(size, dtype=np.int64)
    out = np.empty((size, n - 1), dtype=np.int32)
    for q in range(n - 1):  # 0-based pair (q, q+1), site x = q+1
        r = k - prefix[:, q]  # particles at 1-based positions >= q+1
        delta = binom[n - q - 2, np.maximum(r - 1, 0)]
        right = (states[:, q] == 1) & (states[:, q + 1] == 0)
        left = (states[:, q] == 0) & (states[:, q + 1] == 1)
        col = base.copy()
        col[right] -= delta[right]
        col[left] += delta[left]
        out[:, q] = col
    return out


def sep_flip_reflect(space: StateSpaceIndex) -> np.ndarray:
    """Index involution gamma -> complement of the site-reversed occupancy.

    Defined for k = n/2, where it maps the space to itself and commutes with
    the adjacent-swap dynamics.  On paths it is the mirror eta(x) -> eta(n-x),
    so both extremal configurations are fixed points and laws evolved from
    either are constant on its orbits.
    """
    if space.model != "sep" or space.k * 2 != space.n:
        raise ValueError("flip-reflect symmetry needs a sep space with k = n/2")
    transformed = (1 - space.states[:, ::-1]).astype(np.int64)
    return _sep_rank_rows(transformed).astype(np.int32)


def at_to_sep_projection(space: StateSpaceIndex, k: int) -> np.ndarray:
    """Index map onto the k-particle space via gamma(x) = 1{sigma(x) <= k}."""
    if space.model != "at":
        raise ValueError("needs a permutation space")
    occ = (space.states <= k).astype(np.int64)
    return _sep_rank_rows(occ).astype(np.int64)


def at_reversal_conjugation(space: StateSpaceIndex) -> np.ndarray:
    """Index map of sigma -> rho o sigma o rho with rho(x) = n+1-x.

    This conjugation sends the swap at site x to the swap at site n-x, so it
    commutes with the unrestricted dynamics.
    """
    if space.model != "at":
        raise ValueError("needs a permutation space")
    n = space.n
    transformed = (n + 1 - space.states[:, ::-1]).astype(np.int64)
    return _at_rank_rows(transformed).astype(np.int32)
