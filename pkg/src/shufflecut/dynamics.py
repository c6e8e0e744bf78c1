"""Stochastic dynamics driven by explicit update streams.

The continuous-time shuffle attaches a rate-2 Poisson clock to every site
x in {1..n-1}; at each ring a fair bit decides whether the labels at
positions x, x+1 are sorted increasingly (bit 1) or decreasingly (bit 0).
Equivalently each adjacent transposition occurs at rate 1.  A single merged
stream of intensity 2(n-1) with uniformly assigned sites realizes all clocks
at once, so one stream drives any number of initial states (the grand
coupling), which preserves the pointwise height order of configurations.

Censoring removes events: an event at site x at time s is applied only if x
is allowed at time s.  Schemes are piecewise constant and right-continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .paths import LatticePath
from .perms import Permutation
from .rng import make_generator

__all__ = [
    "UpdateEvent",
    "UpdateStream",
    "CensoringScheme",
    "sample_update_stream",
    "apply_update",
    "apply_path_update",
    "run_trajectory",
    "grand_coupling",
    "run_sep",
    "run_discrete",
]


@dataclass(frozen=True)
class UpdateEvent:
    time: float
    site: int  # 1-based, in 1..n-1
    bit: int  # 1 sorts increasingly, 0 decreasingly


@dataclass(frozen=True)
class UpdateStream:
    """A realization of all clocks on [0, horizon), sorted by time."""

    n: int
    horizon: float
    times: np.ndarray
    sites: np.ndarray
    bits: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def events(self):
        for t, x, b in zip(self.times, self.sites, self.bits):
            yield UpdateEvent(float(t), int(x), int(b))

    def censored(self, scheme: "CensoringScheme") -> "UpdateStream":
        """The substream of events the scheme allows; censoring only removes events."""
        keep = np.fromiter(
            (scheme.allows(int(x), float(t)) for t, x in zip(self.times, self.sites)),
            dtype=bool, count=len(self.times))
        return UpdateStream(self.n, self.horizon, self.times[keep],
                            self.sites[keep], self.bits[keep])


@dataclass(frozen=True)
class CensoringScheme:
    """Right-continuous piecewise-constant allowed-site sets.

    ``pieces[i] = (end_i, allowed_i)`` means sites in ``allowed_i`` may update
    on [end_{i-1}, end_i) (with end_{-1} = 0).  After the last end time all
    sites are allowed.
    """

    n: int
    pieces: tuple[tuple[float, frozenset[int]], ...]

    def __post_init__(self) -> None:
        prev = 0.0
        for end, allowed in self.pieces:
            if end <= prev:
                raise ValueError("piece end times must be strictly increasing")
            if not all(1 <= x <= self.n - 1 for x in allowed):
                raise ValueError("allowed sites must lie in 1..n-1")
            prev = end

    def allowed_at(self, t: float) -> frozenset[int]:
        for end, allowed in self.pieces:
            if t < end:
                return allowed
        return frozenset(range(1, self.n))

    def allows(self, site: int, t: float) -> bool:
        return site in self.allowed_at(t)

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(end for end, _ in self.pieces)


def sample_update_stream(n: int, horizon: float, seed: int,
                         *stream_indices: int) -> UpdateStream:
    """Merged Poisson stream of intensity 2(n-1) with uniform sites, fair bits."""
    if n < 2 or horizon < 0:
        raise ValueError("need n >= 2 and horizon >= 0")
    gen = make_generator(seed, *stream_indices)
    count = gen.poisson(2.0 * (n - 1) * horizon)
    times = np.sort(gen.uniform(0.0, horizon, size=count))
    sites = gen.integers(1, n, size=count, dtype=np.int32)
    bits = gen.integers(0, 2, size=count, dtype=np.int8)
    return UpdateStream(n=n, horizon=horizon, times=times, sites=sites, bits=bits)


def apply_update(p: Permutation, site: int, bit: int) -> Permutation:
    """Sort (bit 1) or reverse-sort (bit 0) the labels at positions site, site+1."""
    return p.sorted_at(site) if bit else p.reverse_sorted_at(site)


def apply_path_update(path: LatticePath, site: int, bit: int) -> LatticePath:
    """Projection of the permutation update: bit 1 lifts a local minimum of the
    path at ``site`` (particle moved to the left slot), bit 0 lowers a local
    maximum."""
    occ = list(path.occupancy())
    a, b = occ[site - 1], occ[site]
    if a + b != 1:
        return path
    occ[site - 1], occ[site] = (1, 0) if bit else (0, 1)
    return LatticePath.from_occupancy(tuple(occ))


def run_trajectory(init: Permutation, stream: UpdateStream,
                   scheme: CensoringScheme | None = None,
                   sample_times: tuple[float, ...] | None = None):
    """Apply the (censored) stream to ``init``.

    Returns the final permutation, or (final, samples) when ``sample_times``
    is given; samples are the states at those times (state just before the
    first later event).
    """
    if init.n != stream.n:
        raise ValueError("sizes differ")
    if scheme is not None:
        stream = stream.censored(scheme)
    samples = []
    pending = list(sample_times) if sample_times is not None else []
    pos = 0
    cur = init
    for t, x, b in zip(stream.times, stream.sites, stream.bits):
        while pos < len(pending) and pending[pos] <= t:
            samples.append(cur)
            pos += 1
        cur = apply_update(cur, int(x), int(b))
    while pos < len(pending):
        samples.append(cur)
        pos += 1
    if sample_times is None:
        return cur
    return cur, samples


def grand_coupling(inits: list[Permutation], stream: UpdateStream,
                   scheme: CensoringScheme | None = None) -> list[Permutation]:
    """Run every initial state under the same stream.

    Each update sorts or reverse-sorts both neighbours in every copy, so
    initial states ordered by the height-surface order stay ordered.
    """
    if scheme is not None:
        stream = stream.censored(scheme)
    lines = np.array([p.line for p in inits], dtype=np.int16)
    _drive_lines(lines, stream.sites, stream.bits)
    return [Permutation(tuple(int(v) for v in row)) for row in lines]


def _drive_lines(lines: np.ndarray, sites: np.ndarray, bits: np.ndarray) -> None:
    """Vectorized in-place update of many one-line rows by a shared stream."""
    for x, b in zip(sites, bits):
        a = lines[:, x - 1].copy()
        c = lines[:, x].copy()
        lo = np.minimum(a, c)
        hi = np.maximum(a, c)
        if b:
            lines[:, x - 1], lines[:, x] = lo, hi
        else:
            lines[:, x - 1], lines[:, x] = hi, lo


def run_sep(init: LatticePath, stream: UpdateStream,
            scheme: CensoringScheme | None = None) -> LatticePath:
    """Apply the (censored) stream to a particle configuration."""
    if init.n != stream.n:
        raise ValueError("sizes differ")
    if scheme is not None:
        stream = stream.censored(scheme)
    occ = np.asarray(init.occupancy(), dtype=np.int8)
    for x, b in zip(stream.sites, stream.bits):
        a, c = occ[x - 1], occ[x]
        if a + c == 1:
            occ[x - 1], occ[x] = (1, 0) if b else (0, 1)
    return LatticePath.from_occupancy(tuple(int(v) for v in occ))


def run_discrete(n: int, steps: int, seed: int,
                 init: Permutation | None = None) -> Permutation:
    """The lazy discrete chain: per step pick a site uniformly, then sort or
    reverse-sort its pair with a fair bit (so the pair is swapped with
    probability 1/2)."""
    cur = init if init is not None else Permutation.identity(n)
    gen = make_generator(seed)
    sites = gen.integers(1, n, size=steps)
    bits = gen.integers(0, 2, size=steps)
    for x, b in zip(sites, bits):
        cur = apply_update(cur, int(x), int(b))
    return cur


# ---------------------------------------------------------------------------
# vectorized replica ensembles
# ---------------------------------------------------------------------------

def _interval_event_batches(n: int, spans: np.ndarray, replicas: int, seed: int):
    """Per-interval padded (sites, bits, counts) matrices, one row per replica.

    Replica r draws its whole stream from substream (seed, r), so its
    trajectory does not depend on how replicas are batched together.
    """
    counts = np.empty((replicas, len(spans)), dtype=np.int64)
    sites_all, bits_all = [], []
    for r in range(replicas):
        gen = make_generator(seed, r)
        c = gen.poisson(2.0 * (n - 1) * spans)
        counts[r] = c
        total = int(c.sum())
        sites_all.append(gen.integers(1, n, size=total, dtype=np.int16))
        bits_all.append(gen.integers(0, 2, size=total, dtype=np.int8))
    offsets = np.zeros(replicas, dtype=np.int64)
    for ti in range(len(spans)):
        c = counts[:, ti]
        width = int(c.max()) if replicas else 0
        sites = np.zeros((replicas, width), dtype=np.int16)
        bits = np.zeros((replicas, width), dtype=np.int8)
        for r in range(replicas):
            m = int(c[r])
            sites[r, :m] = sites_all[r][offsets[r]: offsets[r] + m]
            bits[r, :m] = bits_all[r][offsets[r]: offsets[r] + m]
            offsets[r] += m
        yield sites, bits, c


def _apply_events_rows(lines: np.ndarray, rows: np.ndarray,
                       sites: np.ndarray, bits: np.ndarray) -> None:
    """One shared-step update: row r sorts (bit 1) or reverse-sorts (bit 0)
    positions sites[r], sites[r]+1."""
    a = lines[rows, sites - 1]
    c = lines[rows, sites]
    lo = np.minimum(a, c)
    hi = np.maximum(a, c)
    asc = bits == 1
    lines[rows, sites - 1] = np.where(asc, lo, hi)
    lines[rows, sites] = np.where(asc, hi, lo)


def height_ensemble(n: int, times: np.ndarray, probes_x: np.ndarray,
                    probes_y: np.ndarray, replicas: int, seed: int):
    """Monte Carlo means of the height field from the identity.

    Returns (mean, stderr) arrays of shape (len(times), len(probes_x),
    len(probes_y)) for h_t(x, y) at each probe.
    """
    times = np.asarray(times, dtype=np.float64)
    spans = np.diff(np.concatenate([[0.0], times]))
    if (spans < 0).any():
        raise ValueError("times must be nondecreasing")
    lines = np.tile(np.arange(1, n + 1, dtype=np.int16), (replicas, 1))
    sums = np.zeros((len(times), len(probes_x), len(probes_y)))
    sqsums = np.zeros_like(sums)
    xy = np.outer(probes_x, probes_y).astype(np.float64)
    for ti, (sites, bits, c) in enumerate(
            _interval_event_batches(n, spans, replicas, seed)):
        for step in range(sites.shape[1]):
            rows = np.flatnonzero(c > step)
            _apply_events_rows(lines, rows, sites[rows, step].astype(np.int64),
                               bits[rows, step])
        vals = _height_counts_at_probes(lines, probes_x, probes_y) - xy / n
        sums[ti] = vals.sum(axis=0)
        sqsums[ti] = (vals ** 2).sum(axis=0)
    means = sums / replicas
    var = np.maximum(sqsums / replicas - means ** 2, 0.0)
    return means, np.sqrt(var / replicas)


def _height_counts_at_probes(lines: np.ndarray, probes_x: np.ndarray,
                             probes_y: np.ndarray) -> np.ndarray:
    """#{z <= x : sigma(z) <= y} on the probe grid, one slice per replica."""
    out = np.empty((lines.shape[0], len(probes_x), len(probes_y)))
    for yi, y in enumerate(probes_y):
        pref = np.cumsum(lines <= y, axis=1)
        for xi, x in enumerate(probes_x):
            out[:, xi, yi] = pref[:, x - 1] if x >= 1 else 0
    return out


def _apply_path_events_rows(occ: np.ndarray, rows: np.ndarray,
                            sites: np.ndarray, bits: np.ndarray) -> None:
    a = occ[rows, sites - 1]
    c = occ[rows, sites]
    movable = (a + c) == 1
    rr = rows[movable]
    ss = sites[movable]
    bb = bits[movable]
    occ[rr, ss - 1] = np.where(bb == 1, 1, 0).astype(occ.dtype)
    occ[rr, ss] = np.where(bb == 1, 0, 1).astype(occ.dtype)


def sep_pair_ensemble(n: int, k: int, times: np.ndarray, replicas: int, seed: int):
    """Fraction of replicas where the two extremal configurations still differ.

    Both configurations of a replica are driven by the same substream (the
    grand coupling projected to configurations), so per replica the indicator
    is monotone in time.  Returns (fraction_unequal, stderr) over ``times``.
    """
    from .paths import extremal_paths

    times = np.asarray(times, dtype=np.float64)
    spans = np.diff(np.concatenate([[0.0], times]))
    top0, bot0 = extremal_paths(n, k)
    top = np.tile(np.asarray(top0.occupancy(), dtype=np.int8), (replicas, 1))
    bot = np.tile(np.asarray(bot0.occupancy(), dtype=np.int8), (replicas, 1))
    unequal = np.zeros((replicas, len(times)), dtype=bool)
    for ti, (sites, bits, c) in enumerate(
            _interval_event_batches(n, spans, replicas, seed)):
        for step in range(sites.shape[1]):
            rows = np.flatnonzero(c > step)
            s = sites[rows, step].astype(np.int64)
            b = bits[rows, step]
            _apply_path_events_rows(top, rows, s, b)
            _apply_path_events_rows(bot, rows, s, b)
        unequal[:, ti] = (top != bot).any(axis=1)
    frac = unequal.mean(axis=0)
    stderr = np.sqrt(frac * (1 - frac) / replicas)
    return frac, stderr
