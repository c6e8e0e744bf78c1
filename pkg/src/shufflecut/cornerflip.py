"""Coupled corner-flip dynamics for two ordered particle paths.

Every admissible (site, level) pair carries an up clock and a down clock at
rate 1.  An up event flips a local minimum sitting exactly at that site and
level; a down event flips a local maximum.  Running both paths on the same
clocks preserves their order, and the pair coalesces when the area between
the paths reaches zero.  The top path alone (or the bottom alone) is the
plain k-particle dynamics: every corner of a single path flips at rate 1.

Events are generated by thinning a global Poisson stream of rate
2 * |levels|; a draw picks a (site, level, direction) uniformly and applies
it wherever a matching corner exists.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .paths import LatticePath, extremal_paths
from .rng import make_generator

__all__ = [
    "corner_levels",
    "corners",
    "FlipCensus",
    "flip_census",
    "PairTrace",
    "corner_flip_run",
    "merge_times",
]


def corner_levels(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All (site, scaled level) pairs a path can occupy at interior sites."""
    xs: list[int] = []
    zs: list[int] = []
    for x in range(1, n):
        lo = max(0, k - (n - x))
        hi = min(x, k)
        for p in range(lo, hi + 1):
            xs.append(x)
            zs.append(n * p - x * k)
    return np.asarray(xs, dtype=np.int64), np.asarray(zs, dtype=np.int64)


def corners(path: LatticePath) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(local minima, local maxima) of one path as (site, scaled value)."""
    n, k = path.n, path.k
    s = path.scaled
    mins, maxes = [], []
    for x in range(1, n):
        if s[x - 1] - s[x] == k and s[x + 1] - s[x] == n - k:
            mins.append((x, s[x]))
        if s[x] - s[x - 1] == n - k and s[x] - s[x + 1] == k:
            maxes.append((x, s[x]))
    return mins, maxes


@dataclass(frozen=True)
class FlipCensus:
    """Corner inventory of an ordered pair, restricted to active sites (sites
    where some neighbor separates the paths).  Raising flips grow the area
    between the paths, lowering flips shrink it; elements are
    (path label, site, scaled value)."""

    raising: frozenset
    lowering: frozenset

    @property
    def imbalance(self) -> int:
        return len(self.lowering) - len(self.raising)


def flip_census(top: LatticePath, bot: LatticePath) -> FlipCensus:
    if (top.n, top.k) != (bot.n, bot.k):
        raise ValueError("paths live on different spaces")
    n = top.n
    ts, bs = top.scaled, bot.scaled
    raising, lowering = set(), set()
    top_mins, top_maxes = corners(top)
    bot_mins, bot_maxes = corners(bot)
    active = {x for x in range(1, n)
              if any(ts[y] != bs[y] for y in (x - 1, x, x + 1))}
    for x, z in top_mins:
        if x in active:
            raising.add(("top", x, z))
    for x, z in bot_maxes:
        if x in active:
            raising.add(("bot", x, z))
    for x, z in top_maxes:
        if x in active:
            lowering.add(("top", x, z))
    for x, z in bot_mins:
        if x in active:
            lowering.add(("bot", x, z))
    return FlipCensus(raising=frozenset(raising), lowering=frozenset(lowering))


@njit(cache=True)
def _census_counts(top, bot, n, k):
    u = 0
    d = 0
    for x in range(1, n):
        if top[x - 1] == bot[x - 1] and top[x] == bot[x] and top[x + 1] == bot[x + 1]:
            continue
        if top[x - 1] - top[x] == k and top[x + 1] - top[x] == n - k:
            u += 1
        if top[x] - top[x - 1] == n - k and top[x] - top[x + 1] == k:
            d += 1
        if bot[x] - bot[x - 1] == n - k and bot[x] - bot[x + 1] == k:
            u += 1
        if bot[x - 1] - bot[x] == k and bot[x + 1] - bot[x] == n - k:
            d += 1
    return u, d


@njit(cache=True)
def _pair_kernel(n, k, top, bot, tx, tz, uni, horizon, grid, stop_on_merge,
                 out_area, out_u, out_d):
    m = tx.shape[0]
    rate = 2.0 * m
    area = np.int64(0)
    for x in range(n + 1):
        area += top[x] - bot[x]
    merged = area == 0
    merge_time = 0.0 if merged else np.inf
    t = 0.0
    gi = 0
    ptr = 0
    events = 0
    audit_ok = True
    u_ct, d_ct = _census_counts(top, bot, n, k)
    if area > 0 and not (0 <= d_ct - u_ct <= 2):
        audit_ok = False
    while True:
        if ptr + 2 > uni.shape[0]:
            return 1, merge_time, events, audit_ok  # ran out of randomness
        w = -math.log(1.0 - uni[ptr]) / rate
        ptr += 1
        tn = t + w
        while gi < grid.shape[0] and grid[gi] < tn:
            out_area[gi] = area
            out_u[gi] = u_ct
            out_d[gi] = d_ct
            gi += 1
        if tn >= horizon or gi >= grid.shape[0] and stop_on_merge and merged:
            break
        sel = int(uni[ptr] * 2.0 * m)
        ptr += 1
        if sel >= 2 * m:
            sel = 2 * m - 1
        pos = sel >> 1
        x = tx[pos]
        z = tz[pos]
        changed = False
        if sel & 1 == 0:  # up: flip local minima lying exactly at (x, z)
            if top[x - 1] == z + k and top[x] == z and top[x + 1] == z + n - k:
                top[x] += n
                area += n
                changed = True
            if bot[x - 1] == z + k and bot[x] == z and bot[x + 1] == z + n - k:
                bot[x] += n
                area -= n
                changed = True
        else:  # down: flip local maxima at (x, z)
            if top[x] == z and top[x - 1] == z - (n - k) and top[x + 1] == z - k:
                top[x] -= n
                area -= n
                changed = True
            if bot[x] == z and bot[x - 1] == z - (n - k) and bot[x + 1] == z - k:
                bot[x] -= n
                area += n
                changed = True
        t = tn
        events += 1
        if changed:
            u_ct, d_ct = _census_counts(top, bot, n, k)
            if area > 0 and not (0 <= d_ct - u_ct <= 2):
                audit_ok = False
            if area == 0 and not merged:
                merged = True
                merge_time = t
                if stop_on_merge and gi >= grid.shape[0]:
                    break
    while gi < grid.shape[0]:
        out_area[gi] = area
        out_u[gi] = u_ct
        out_d[gi] = d_ct
        gi += 1
    return 0, merge_time, events, audit_ok


@dataclass(frozen=True)
class PairTrace:
    """Sampled state of one coupled run: area between the paths (in path
    units, not scaled), corner counts, and the coalescence time."""

    n: int
    k: int
    times: np.ndarray
    areas: np.ndarray
    raising_counts: np.ndarray
    lowering_counts: np.ndarray
    merge_time: float
    events: int
    audit_ok: bool

    @property
    def merged(self) -> bool:
        return math.isfinite(self.merge_time)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "area", "raising", "lowering", "merged"])
            for i, t in enumerate(self.times):
                w.writerow([f"{t:.9g}", f"{self.areas[i]:.9g}",
                            int(self.raising_counts[i]),
                            int(self.lowering_counts[i]),
                            int(self.merged and self.merge_time <= t)])


def corner_flip_run(n: int, k: int, horizon: float, seed: int, *,
                    sample_times=None, top: LatticePath | None = None,
                    bot: LatticePath | None = None, stop_on_merge: bool = False,
                    run_index: int = 0) -> PairTrace:
    """Run the coupled pair from (top, bot) (extremal paths by default).

    The event stream is deterministic in (seed, run_index): exhausting the
    uniform buffer triggers a rerun with a longer buffer drawn from the same
    generator stream, whose leading values coincide.
    """
    default_top, default_bot = extremal_paths(n, k)
    top = default_top if top is None else top
    bot = default_bot if bot is None else bot
    for p in (top, bot):
        if (p.n, p.k) != (n, k):
            raise ValueError("paths live on different spaces")
    if any(t < b for t, b in zip(top.scaled, bot.scaled)):
        raise ValueError("top must dominate bot pointwise")
    if not math.isfinite(horizon) and not stop_on_merge:
        raise ValueError("an open-ended run must stop on merge")
    grid = np.array([] if sample_times is None else sorted(sample_times),
                    dtype=float)
    if grid.size and (grid[0] < 0 or (math.isfinite(horizon) and grid[-1] > horizon)):
        raise ValueError("sample times must lie in [0, horizon]")
    tx, tz = corner_levels(n, k)
    size = 1 << 13
    while True:
        gen = make_generator(seed, 7001, run_index)
        uni = gen.random(size)
        top_arr = np.asarray(top.scaled, dtype=np.int64)
        bot_arr = np.asarray(bot.scaled, dtype=np.int64)
        out_area = np.zeros(grid.size, dtype=np.int64)
        out_u = np.zeros(grid.size, dtype=np.int64)
        out_d = np.zeros(grid.size, dtype=np.int64)
        status, merge_time, events, audit_ok = _pair_kernel(
            n, k, top_arr, bot_arr, tx, tz, uni, horizon, grid,
            stop_on_merge, out_area, out_u, out_d)
        if status == 0:
            return PairTrace(n=n, k=k, times=grid,
                             areas=out_area.astype(float) / n,
                             raising_counts=out_u, lowering_counts=out_d,
                             merge_time=float(merge_time), events=events,
                             audit_ok=bool(audit_ok))
        size *= 2


def merge_times(n: int, k: int, runs: int, seed: int,
                horizon: float = math.inf) -> np.ndarray:
    """Coalescence times of the extremal pair over independent runs."""
    out = np.empty(runs)
    for r in range(runs):
        trace = corner_flip_run(n, k, horizon, seed, stop_on_merge=True,
                                run_index=r)
        out[r] = trace.merge_time
    return out
