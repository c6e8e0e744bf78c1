"""Order-based inequalities on enumerated spaces.

The partial order is the pointwise height-surface order throughout: state a
is below state b when every height value of a is at or below the matching
value of b (for permutations the surface is h(x,y), for configurations the
path eta).  Increasing means monotone for that order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import statespace as sps
from .exact import (DistributionVector, theta_chain_rational, total_variation,
                    tv_rational, uniform_rational)
from .perms import BlockPartition, Permutation, semi_skeleton
from .statespace import StateSpaceIndex

__all__ = [
    "order_leq_matrix",
    "scaled_heights",
    "is_increasing_density",
    "up_set_mask",
    "dominance_check",
    "FkgResult",
    "fkg_check",
    "HolleyResult",
    "holley_check",
    "CensoringComparison",
    "censoring_comparison",
    "label_erased",
    "TvDecomposition",
    "tv_decomposition",
]

_order_cache: dict[tuple, np.ndarray] = {}
_height_cache: dict[tuple, np.ndarray] = {}


def scaled_heights(space: StateSpaceIndex) -> np.ndarray:
    """Flattened integer height data per state (n*h grids, or n*eta paths)."""
    key = (space.model, space.n, space.k)
    if key not in _height_cache:
        n = space.n
        if space.model == "at":
            lines = space.states.astype(np.int32)
            occ = (lines[:, :, None] <= np.arange(1, n + 1, dtype=np.int32)[None, None, :])
            counts = np.cumsum(occ, axis=1, dtype=np.int32)
            grid = n * counts - np.outer(np.arange(1, n + 1), np.arange(1, n + 1))[None, :, :]
            _height_cache[key] = grid.reshape(space.size, -1)
        else:
            k = space.k
            pref = np.cumsum(space.states, axis=1, dtype=np.int32)
            _height_cache[key] = n * pref - np.arange(1, n + 1, dtype=np.int32) * k
    return _height_cache[key]


def order_leq_matrix(space: StateSpaceIndex, chunk: int = 128) -> np.ndarray:
    """Boolean matrix with [i, j] true iff state i <= state j pointwise."""
    key = (space.model, space.n, space.k)
    if key not in _order_cache:
        h = scaled_heights(space)
        size = space.size
        out = np.empty((size, size), dtype=bool)
        for lo in range(0, size, chunk):
            hi = min(lo + chunk, size)
            out[lo:hi] = (h[lo:hi, None, :] <= h[None, :, :]).all(axis=2)
        _order_cache[key] = out
    return _order_cache[key]


def is_increasing_density(dist: DistributionVector, tol: float = 1e-12) -> bool:
    """True iff the density never decreases along the order."""
    m = order_leq_matrix(dist.space)
    p = dist.probs
    return not bool((m & (p[:, None] > p[None, :] + tol)).any())


def up_set_mask(space: StateSpaceIndex, index: int) -> np.ndarray:
    """Indicator of the principal up-set {state >= state_index}."""
    return order_leq_matrix(space)[index].copy()


def is_increasing_event(space: StateSpaceIndex, mask: np.ndarray) -> bool:
    m = order_leq_matrix(space)
    return not bool((m & mask[:, None] & ~mask[None, :]).any())


def dominance_check(p: DistributionVector, q: DistributionVector, *,
                    tol: float = 1e-9) -> bool:
    """Whether p stochastically dominates q (a coupling with X >= Y exists).

    Feasibility of the coupling is decided by a max-flow: source -> a with
    capacity p(a), a -> b wherever b <= a, b -> sink with capacity q(b);
    domination holds iff the flow saturates.  Capacities are scaled to
    int32 (the only dtype the flow solver accepts), so ``tol`` absorbs both
    rounding and evolution error.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_flow

    if p.space is not q.space:
        raise ValueError("dominance needs both laws on one space")
    size = p.space.size
    leq = order_leq_matrix(p.space)
    scale = 10 ** 9
    cap_p = np.round(p.probs * scale).astype(np.int32)
    cap_q = np.round(q.probs * scale).astype(np.int32)
    src, snk = 0, 2 * size + 1
    rows, cols, caps = [], [], []
    rows += [src] * size
    cols += list(range(1, size + 1))
    caps += list(cap_p)
    arc_b, arc_a = np.nonzero(leq)  # state arc_b <= state arc_a
    rows += list(arc_a + 1)
    cols += list(arc_b + 1 + size)
    caps += [scale] * len(arc_a)
    rows += list(range(size + 1, 2 * size + 1))
    cols += [snk] * size
    caps += list(cap_q)
    graph = csr_matrix((np.asarray(caps, dtype=np.int32),
                        (np.asarray(rows), np.asarray(cols))),
                       shape=(2 * size + 2, 2 * size + 2))
    flow = maximum_flow(graph, src, snk).flow_value
    want = min(int(cap_p.sum()), int(cap_q.sum()))
    return bool(want - int(flow) <= max(tol * scale, 4 * size))


@dataclass(frozen=True)
class FkgResult:
    holds: bool
    lhs: Fraction  # mean of f*g under uniform
    rhs: Fraction  # product of the means


def _check_increasing_values(space: StateSpaceIndex, values, name: str) -> None:
    m = order_leq_matrix(space)
    ii, jj = np.nonzero(m)
    for i, j in zip(ii, jj):
        if values[i] > values[j]:
            raise ValueError(f"{name} is not increasing: violates at pair ({i}, {j})")


def fkg_check(space: StateSpaceIndex, f, g) -> FkgResult:
    """Positive correlation of two increasing functions under the uniform law,
    in exact arithmetic.  Raises if either function is not increasing."""
    f = [Fraction(v) for v in f]
    g = [Fraction(v) for v in g]
    _check_increasing_values(space, f, "f")
    _check_increasing_values(space, g, "g")
    size = space.size
    lhs = sum((a * b for a, b in zip(f, g)), Fraction(0)) / size
    rhs = (sum(f, Fraction(0)) / size) * (sum(g, Fraction(0)) / size)
    return FkgResult(holds=lhs >= rhs, lhs=lhs, rhs=rhs)


@dataclass(frozen=True)
class HolleyResult:
    holds: bool
    mean_given_a: Fraction
    mean_given_b: Fraction


def holley_check(space: StateSpaceIndex, event_a: np.ndarray,
                 event_b: np.ndarray, f) -> HolleyResult:
    """E[f | A] >= E[f | B] for nested increasing events closed under pairwise
    minima (min(A, B) inside B), with f increasing; exact arithmetic.

    Requires a configuration space, whose paths form a lattice under pointwise
    min and max.
    """
    if space.model != "sep":
        raise ValueError("the lattice minimum needs a configuration space")
    event_a = np.asarray(event_a, dtype=bool)
    event_b = np.asarray(event_b, dtype=bool)
    if not event_a.any() or not event_b.any():
        raise ValueError("events must be nonempty")
    if (event_a & ~event_b).any():
        raise ValueError("need A inside B")
    if not (is_increasing_event(space, event_a) and is_increasing_event(space, event_b)):
        raise ValueError("events must be increasing")
    f = [Fraction(v) for v in f]
    _check_increasing_values(space, f, "f")
    heights = scaled_heights(space)
    n, k = space.n, space.k
    idx_b = set(np.flatnonzero(event_b))
    for a in np.flatnonzero(event_a):
        for b in np.flatnonzero(event_b):
            mn = np.minimum(heights[a], heights[b])
            occ = (np.diff(np.concatenate([[0], mn])) == n - k).astype(np.int64)
            m_idx = int(sps._sep_rank_rows(occ[None, :])[0])
            if m_idx not in idx_b:
                raise ValueError("min(A, B) leaves B: Holley hypotheses fail")
    mean_a = sum((f[i] for i in np.flatnonzero(event_a)), Fraction(0)) / int(event_a.sum())
    mean_b = sum((f[i] for i in np.flatnonzero(event_b)), Fraction(0)) / int(event_b.sum())
    return HolleyResult(holds=mean_a >= mean_b, mean_given_a=mean_a,
                        mean_given_b=mean_b)


@dataclass(frozen=True)
class CensoringComparison:
    """Distances to uniform for a deterministic update sequence from the
    identity, with and without the omitted updates.  Omitting updates can only
    keep the law farther from uniform: omitted_tv >= full_tv."""

    n: int
    sequence: tuple[int, ...]
    omitted_indices: tuple[int, ...]
    full_tv: Fraction
    omitted_tv: Fraction

    @property
    def holds(self) -> bool:
        return self.omitted_tv >= self.full_tv


def censoring_comparison(n: int, sequence: tuple[int, ...],
                         omit: tuple[int, ...]) -> CensoringComparison:
    """Exact comparison of a pooled-update sequence against the same sequence
    with the updates at 0-based positions ``omit`` removed."""
    omit_set = set(omit)
    if not all(0 <= i < len(sequence) for i in omit_set):
        raise ValueError("omit positions must index the sequence")
    kept = tuple(x for i, x in enumerate(sequence) if i not in omit_set)
    mu = uniform_rational(n)
    full = theta_chain_rational(n, tuple(sequence))
    omitted = theta_chain_rational(n, kept)
    return CensoringComparison(
        n=n, sequence=tuple(sequence), omitted_indices=tuple(sorted(omit_set)),
        full_tv=tv_rational(full, mu), omitted_tv=tv_rational(omitted, mu))


def _relabel_group(bp: BlockPartition):
    """All label maps fixing each block {x_{i-1}+1..x_i} setwise."""
    per_block = [list(itertools.permutations(blk)) for blk in bp.blocks()]
    for choice in itertools.product(*per_block):
        tau = np.zeros(bp.n + 1, dtype=np.int64)
        for blk, perm in zip(bp.blocks(), choice):
            for src, dst in zip(blk, perm):
                tau[src] = dst
        yield tau


def label_erased(dist: DistributionVector, bp: BlockPartition) -> DistributionVector:
    """Average over relabelings of the cards within each label block.

    nu~(sigma) = mean over block-preserving tau of nu(tau o sigma); the
    semi-skeleton is invariant under such relabelings, so nu~ carries exactly
    the semi-skeleton information of nu.
    """
    space = dist.space
    if space.model != "at":
        raise ValueError("label erasure acts on permutation spaces")
    if bp.n != space.n:
        raise ValueError("sizes differ")
    lines = space.states.astype(np.int64)
    acc = np.zeros_like(dist.probs)
    count = 0
    for tau in _relabel_group(bp):
        relabeled = tau[lines]
        idx = sps._at_rank_rows(relabeled)
        acc += dist.probs[idx]
        count += 1
    return DistributionVector(space, acc / count)


@dataclass(frozen=True)
class TvDecomposition:
    """skeleton_tv = distance between the pushforwards onto semi-skeletons;
    erasure_tv = distance from the law to its label-erased version.  The sum
    bounds the distance to uniform from above, and skeleton_tv equals the
    distance of the erased law to uniform exactly."""

    skeleton_tv: float
    erasure_tv: float

    @property
    def bound(self) -> float:
        return self.skeleton_tv + self.erasure_tv


def _semi_skeleton_ids(space: StateSpaceIndex, bp: BlockPartition) -> np.ndarray:
    ids: dict[bytes, int] = {}
    out = np.empty(space.size, dtype=np.int64)
    for j in range(space.size):
        p = Permutation(space.state(j))
        key = semi_skeleton(p, bp).scaled.tobytes()
        out[j] = ids.setdefault(key, len(ids))
    return out


def tv_decomposition(dist: DistributionVector, bp: BlockPartition) -> TvDecomposition:
    space = dist.space
    ids = _semi_skeleton_ids(space, bp)
    num = ids.max() + 1
    nu_hat = np.bincount(ids, weights=dist.probs, minlength=num)
    mu_hat = np.bincount(ids, minlength=num) / space.size
    skeleton_tv = 0.5 * float(np.abs(nu_hat - mu_hat).sum())
    erasure_tv = total_variation(dist, label_erased(dist, bp))
    return TvDecomposition(skeleton_tv=skeleton_tv, erasure_tv=erasure_tv)
