"""Exact distribution calculus on enumerated state spaces.

Distributions are dense float64 vectors over a :class:`StateSpaceIndex`.
Continuous-time evolution uses uniformization: the generator
L = sum_x (swap_x - I) over allowed sites x satisfies L = r (K - I) with
r = n-1 and K the "pick a site uniformly, exchange its pair" kernel in which
blocked or ineffective exchanges are self loops, so

    P_t = sum_m  Poisson(r t)(m) K^m,

truncated where the Poisson tail drops below ``tail`` (default 1e-13).  The
same swap tables drive the lazy discrete chain (pick a site uniformly, then
sort or reverse-sort with a fair bit, i.e. swap with probability 1/2).

All spaces here have the uniform measure as their stationary law, so
densities and probabilities are interchangeable up to the factor ``size``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit
from scipy.stats import poisson

from .dynamics import CensoringScheme
from .statespace import StateSpaceIndex, sep_flip_reflect, sep_space

__all__ = [
    "DistributionVector",
    "point_mass",
    "uniform",
    "total_variation",
    "separation",
    "evolve",
    "update_operator",
    "discrete_step",
    "discrete_profile",
    "PoissonSandwich",
    "poisson_sandwich",
    "SeparationSplit",
    "separation_via_extremal",
    "pushforward",
    "theta_chain_rational",
    "tv_rational",
    "SymmetricSepEvolver",
]

DEFAULT_TAIL = 1e-13


@dataclass
class DistributionVector:
    space: StateSpaceIndex
    probs: np.ndarray

    def __post_init__(self) -> None:
        if self.probs.shape != (self.space.size,):
            raise ValueError("probability vector does not match the space")

    def prob_of(self, state: tuple[int, ...]) -> float:
        return float(self.probs[self.space.index_of(state)])

    def copy(self) -> "DistributionVector":
        return DistributionVector(self.space, self.probs.copy())


def point_mass(space: StateSpaceIndex, state_or_index) -> DistributionVector:
    idx = (state_or_index if isinstance(state_or_index, (int, np.integer))
           else space.index_of(tuple(state_or_index)))
    probs = np.zeros(space.size)
    probs[idx] = 1.0
    return DistributionVector(space, probs)


def uniform(space: StateSpaceIndex) -> DistributionVector:
    return DistributionVector(space, np.full(space.size, 1.0 / space.size))


def _aligned(p: DistributionVector, q: DistributionVector) -> None:
    if p.space is not q.space and (p.space.model, p.space.n, p.space.k) != (
            q.space.model, q.space.n, q.space.k):
        raise ValueError("distributions live on different spaces")


def total_variation(p: DistributionVector, q: DistributionVector) -> float:
    """Half the l1 distance, equal to the maximal difference over events."""
    _aligned(p, q)
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def separation(p: DistributionVector, q: DistributionVector | None = None) -> float:
    """max_state (1 - p(state)/q(state)), clamped below at 0 (q defaults uniform)."""
    ref = q.probs if q is not None else np.full(p.space.size, 1.0 / p.space.size)
    return max(0.0, float((1.0 - p.probs / ref).max()))


@njit(cache=True)
def _kernel_step(nu, tab, blocked, weight, out, result):
    """out = K nu for the uniformized kernel; result += weight * out."""
    size, m = tab.shape
    inv = 1.0 / (m + blocked)
    for j in range(size):
        acc = blocked * nu[j]
        for c in range(m):
            acc += nu[tab[j, c]]
        val = acc * inv
        out[j] = val
        result[j] += weight * val


def _poisson_weights(mu: float, tail: float) -> np.ndarray:
    if mu <= 0.0:
        return np.array([1.0])
    top = int(poisson.isf(tail, mu)) + 2
    return poisson.pmf(np.arange(top + 1), mu)


def _advance(probs: np.ndarray, tables: np.ndarray, blocked: int, dt: float,
             tail: float) -> np.ndarray:
    rate = tables.shape[1] + blocked
    w = _poisson_weights(rate * dt, tail)
    result = w[0] * probs
    if len(w) == 1:
        return result
    cur = probs.copy()
    out = np.empty_like(probs)
    for m in range(1, len(w)):
        _kernel_step(cur, tables, blocked, w[m], out, result)
        cur, out = out, cur
    return result


def _allowed_tables(space: StateSpaceIndex, allowed: frozenset[int] | None):
    """(tables restricted to allowed sites, number of censored sites)."""
    full = space.swap_tables()
    if allowed is None or len(allowed) == space.n - 1:
        return full, 0
    cols = sorted(x - 1 for x in allowed)
    return np.ascontiguousarray(full[:, cols]), (space.n - 1) - len(cols)


def evolve(dist: DistributionVector, t: float,
           scheme: CensoringScheme | None = None, *,
           tail: float = DEFAULT_TAIL) -> DistributionVector:
    """Exact law at time ``t`` under the (censored) dynamics.

    With a scheme, the generator on each piece keeps only the allowed sites;
    censored sites contribute self loops at the shared uniformization rate, so
    pieces chain together exactly.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    space = dist.space
    probs = dist.probs
    if scheme is None:
        segments = [(t, None)]
    else:
        if scheme.n != space.n:
            raise ValueError("scheme size differs from the space")
        cutpoints = [b for b in scheme.breakpoints() if b < t] + [t]
        segments = []
        prev = 0.0
        for end in cutpoints:
            if end > prev:
                segments.append((end - prev, scheme.allowed_at(prev)))
                prev = end
    for dt, allowed in segments:
        tables, blocked = _allowed_tables(space, allowed)
        probs = _advance(probs, tables, blocked, dt, tail)
    return DistributionVector(space, probs)


def update_operator(dist: DistributionVector, site: int) -> DistributionVector:
    """Pool the two states differing only in the pair at ``site``:
    nu'(s) = (nu(s) + nu(s with the pair exchanged)) / 2."""
    if not 1 <= site <= dist.space.n - 1:
        raise ValueError(f"site must be in 1..n-1, got {site}")
    col = dist.space.swap_tables()[:, site - 1]
    return DistributionVector(dist.space, 0.5 * (dist.probs + dist.probs[col]))


def discrete_step(dist: DistributionVector) -> DistributionVector:
    """One step of the lazy chain: site uniform, pair swapped with prob 1/2."""
    tables = dist.space.swap_tables()
    out = np.empty_like(dist.probs)
    result = np.zeros_like(dist.probs)
    _kernel_step(dist.probs, tables, 0, 0.0, out, result)
    return DistributionVector(dist.space, 0.5 * (dist.probs + out))


def discrete_profile(space: StateSpaceIndex, steps: int,
                     start: DistributionVector | None = None) -> np.ndarray:
    """Total variation to uniform after 0..steps lazy-chain steps."""
    cur = start if start is not None else point_mass(space, 0)
    mu = uniform(space)
    out = np.empty(steps + 1)
    out[0] = total_variation(cur, mu)
    for m in range(1, steps + 1):
        cur = discrete_step(cur)
        out[m] = total_variation(cur, mu)
    return out


@dataclass(frozen=True)
class PoissonSandwich:
    """Bounds on the discrete-chain distance via the continuous one.

    With w_m = Poisson(2t(n-1))(m) and D(t) the continuous distance,

        lower = max(0, (D(t) - P[M < steps]) / P[M >= steps]),
        upper = min(1, D(t) / P[M <= steps]),

    where both follow from monotonicity of the discrete distance in the step
    count.  The continuous time 2t(n-1) counts lazy updates, twice the swap
    rate, because an update swaps only with probability 1/2.
    """

    n: int
    steps: int
    t: float
    tv_continuous: float
    lower: float
    upper: float


def poisson_sandwich(n: int, steps: int, t: float, *, model: str = "at",
                     k: int | None = None,
                     tail: float = DEFAULT_TAIL) -> PoissonSandwich:
    from .statespace import at_space

    space = at_space(n) if model == "at" else sep_space(n, k)
    start = point_mass(space, 0 if model == "at" else space.size - 1)
    mu = uniform(space)
    tv = total_variation(evolve(start, t, tail=tail), mu)
    lam = 2.0 * t * (n - 1)
    below_incl = float(poisson.cdf(steps, lam))
    below_strict = float(poisson.cdf(steps - 1, lam)) if steps > 0 else 0.0
    at_or_above = float(poisson.sf(steps - 1, lam)) if steps > 0 else 1.0
    upper = min(1.0, tv / below_incl) if below_incl > 0 else 1.0
    lower = max(0.0, (tv - below_strict) / at_or_above) if at_or_above > 0 else 0.0
    return PoissonSandwich(n=n, steps=steps, t=t, tv_continuous=tv,
                           lower=lower, upper=upper)


def pushforward(dist: DistributionVector, index_map: np.ndarray,
                target: StateSpaceIndex) -> DistributionVector:
    probs = np.zeros(target.size)
    np.add.at(probs, index_map, dist.probs)
    return DistributionVector(target, probs)


@dataclass(frozen=True)
class SeparationSplit:
    """Separation from the top configuration, computed two ways.

    ``direct`` scans all states; ``via_bottom`` uses 1 - P_t(bottom)/mu(bottom),
    valid because the evolved law has an increasing density, putting its
    minimal density at the bottom configuration.  ``argmin_is_bottom`` records
    whether the scan really attains its minimum there, and ``halftime_gap`` is
    the defect of the reversibility identity
    P_2s(top -> bottom) = sum_state P_s(top -> state) P_s(bottom -> state).
    """

    n: int
    k: int
    t: float
    direct: float
    via_bottom: float
    argmin_is_bottom: bool
    halftime_gap: float


def separation_via_extremal(n: int, k: int, t: float, *,
                            tail: float = DEFAULT_TAIL) -> SeparationSplit:
    space = sep_space(n, k)
    top, bottom = space.size - 1, 0
    mu = 1.0 / space.size
    p_t = evolve(point_mass(space, top), t, tail=tail)
    direct = separation(p_t)
    via_bottom = 1.0 - float(p_t.probs[bottom]) / mu
    argmin_ok = bool(p_t.probs[bottom] <= p_t.probs.min() + 1e-12)
    p_half_top = evolve(point_mass(space, top), t / 2.0, tail=tail)
    p_half_bot = evolve(point_mass(space, bottom), t / 2.0, tail=tail)
    split = float(np.dot(p_half_top.probs, p_half_bot.probs))
    halftime_gap = abs(split - float(p_t.probs[bottom]))
    return SeparationSplit(n=n, k=k, t=t, direct=direct, via_bottom=via_bottom,
                           argmin_is_bottom=argmin_ok, halftime_gap=halftime_gap)


# ---------------------------------------------------------------------------
# rational pooling chains (exact arithmetic on small permutation spaces)
# ---------------------------------------------------------------------------

def _swap_tuple(state: tuple[int, ...], site: int) -> tuple[int, ...]:
    lst = list(state)
    lst[site - 1], lst[site] = lst[site], lst[site - 1]
    return tuple(lst)


def theta_chain_rational(n: int, sites: tuple[int, ...]) -> dict[tuple, Fraction]:
    """Apply the pooling operators at ``sites`` in order to the point mass at
    the identity, in exact arithmetic."""
    dist: dict[tuple, Fraction] = {tuple(range(1, n + 1)): Fraction(1)}
    for x in sites:
        if not 1 <= x <= n - 1:
            raise ValueError(f"site must be in 1..n-1, got {x}")
        nxt: dict[tuple, Fraction] = {}
        for state, pr in dist.items():
            half = pr / 2
            nxt[state] = nxt.get(state, Fraction(0)) + half
            partner = _swap_tuple(state, x)
            nxt[partner] = nxt.get(partner, Fraction(0)) + half
        dist = nxt
    return dist


def tv_rational(p: dict[tuple, Fraction], q: dict[tuple, Fraction]) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(s, Fraction(0)) - q.get(s, Fraction(0))) for s in keys),
               Fraction(0)) / 2


def uniform_rational(n: int) -> dict[tuple, Fraction]:
    import itertools

    total = math.factorial(n)
    return {line: Fraction(1, total)
            for line in itertools.permutations(range(1, n + 1))}


# ---------------------------------------------------------------------------
# symmetry-reduced evolution for the half-filled exclusion space
# ---------------------------------------------------------------------------

@dataclass
class SymmetricSepEvolver:
    """Evolution from the top configuration at k = n/2 on the quotient by the
    complement-and-reverse involution, which commutes with the dynamics and
    fixes the top configuration's law.

    Stores per-state probabilities on orbit representatives only; total
    variation weights each representative by its orbit size.  Produces the
    same numbers as the full space (checked in the test suite) at half the
    memory traffic.
    """

    n: int
    k: int
    tables: np.ndarray = field(repr=False)
    orbit_sizes: np.ndarray = field(repr=False)
    top_rep: int = 0
    total_states: int = 0

    @staticmethod
    def build(n: int, k: int) -> "SymmetricSepEvolver":
        if 2 * k != n:
            raise ValueError("symmetry reduction needs k = n/2")
        space = sep_space(n, k)
        inv = sep_flip_reflect(space)
        full = space.swap_tables()
        space.free_tables()
        idx = np.arange(space.size, dtype=np.int64)
        rep_of = np.minimum(idx, inv.astype(np.int64))
        rep_ids = np.flatnonzero(rep_of == idx)
        rep_pos = np.searchsorted(rep_ids, rep_of).astype(np.int32)
        tables = np.ascontiguousarray(rep_pos[full[rep_ids]])
        orbit_sizes = (1 + (inv[rep_ids] != rep_ids)).astype(np.float64)
        top_rep = int(rep_pos[space.size - 1])
        return SymmetricSepEvolver(n=n, k=k, tables=tables,
                                   orbit_sizes=orbit_sizes, top_rep=top_rep,
                                   total_states=space.size)

    def start_top(self) -> np.ndarray:
        probs = np.zeros(self.tables.shape[0])
        probs[self.top_rep] = 1.0
        return probs

    def advance(self, probs: np.ndarray, dt: float,
                tail: float = DEFAULT_TAIL) -> np.ndarray:
        return _advance(probs, self.tables, 0, dt, tail)

    def tv_to_uniform(self, probs: np.ndarray) -> float:
        mu = 1.0 / self.total_states
        return 0.5 * float((self.orbit_sizes * np.abs(probs - mu)).sum())
