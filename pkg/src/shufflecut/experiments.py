"""Reproducible experiments over the shuffle dynamics.

Each experiment returns an :class:`~shufflecut.report.ExperimentReport` whose
verdicts encode the claims it checks; the CLI maps reports to files and exit
codes.  Monte Carlo estimates always carry standard errors, and verdicts that
compare an estimate to an exact quantity use a four-standard-error margin.
"""

from __future__ import annotations

import math

import numpy as np

from .cornerflip import corner_flip_run
from .dynamics import (CensoringScheme, _apply_events_rows,
                       _interval_event_batches, run_trajectory,
                       sample_update_stream, sep_pair_ensemble)
from .exact import (DEFAULT_TAIL, SymmetricSepEvolver, _advance, evolve,
                    point_mass, pushforward, separation_via_extremal,
                    total_variation, uniform)
from .perms import (BlockPartition, Permutation, semi_skeleton, skeleton,
                    volume)
from .report import ExperimentReport
from .spectral import (chebyshev_tv_lower, fourier_moments, gap_eigenvalue,
                       uniform_fourier_variance, wilson_upper_bound_particles)
from .statespace import at_space, sep_space

__all__ = [
    "tv_upper_curve",
    "area_audit",
    "cutoff_profile",
    "separation_profile",
    "three_phase_schedule",
    "wilson_sandwich",
    "REGISTRY",
]


def _time_scale(n: int, k: int | None) -> float:
    m = n if k is None else max(k, 2)
    return (n * n / (2.0 * math.pi ** 2)) * math.log(m)


def _default_grid(n: int, k: int | None, points: int = 12,
                  lo: float = 0.2, hi: float = 1.8) -> np.ndarray:
    return np.linspace(lo, hi, points) * _time_scale(n, k)


def _at_pair_ensemble(n: int, times: np.ndarray, replicas: int, seed: int):
    """Fraction of replicas where the identity and reversal copies still
    differ under the shared-stream coupling."""
    times = np.asarray(times, dtype=np.float64)
    spans = np.diff(np.concatenate([[0.0], times]))
    top = np.tile(np.arange(1, n + 1, dtype=np.int16), (replicas, 1))
    bot = np.tile(np.arange(n, 0, -1, dtype=np.int16), (replicas, 1))
    unequal = np.zeros((replicas, len(times)), dtype=bool)
    for ti, (sites, bits, c) in enumerate(
            _interval_event_batches(n, spans, replicas, seed)):
        for step in range(sites.shape[1]):
            rows = np.flatnonzero(c > step)
            s = sites[rows, step].astype(np.int64)
            b = bits[rows, step]
            _apply_events_rows(top, rows, s, b)
            _apply_events_rows(bot, rows, s, b)
        unequal[:, ti] = (top != bot).any(axis=1)
    frac = unequal.mean(axis=0)
    return frac, np.sqrt(frac * (1 - frac) / replicas)


def _exact_tv_curve(space, start_index: int, times: np.ndarray,
                    tail: float) -> np.ndarray:
    dist = point_mass(space, start_index)
    mu = uniform(space)
    out = np.empty(len(times))
    prev = 0.0
    for i, t in enumerate(times):
        dist = evolve(dist, t - prev, tail=tail)
        prev = t
        out[i] = total_variation(dist, mu)
    return out


def tv_upper_curve(*, model: str = "sep", n: int = 16, k: int = 8,
                   times=None, replicas: int = 2000,
                   coupling: str = "grand", mode: str = "mc",
                   seed: int = 0, tail: float = DEFAULT_TAIL) -> ExperimentReport:
    """Coupling upper bound on worst-start distance to uniform over a grid.

    The estimate is the probability that the two extremal copies, driven by
    one update stream, still differ; with mode="exact" the exact distance
    from the extremal start is overlaid and must sit below the estimate.
    """
    if model not in ("at", "sep"):
        raise ValueError("model must be 'at' or 'sep'")
    if model == "sep" and not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    times = np.sort(np.asarray(
        _default_grid(n, k if model == "sep" else None) if times is None
        else np.asarray(times, dtype=float)))
    if model == "sep":
        if coupling == "grand":
            frac, se = sep_pair_ensemble(n, k, times, replicas, seed)
        elif coupling == "corner":
            from .cornerflip import merge_times
            mt = merge_times(n, k, replicas, seed)
            frac = (mt[:, None] > times[None, :]).mean(axis=0)
            se = np.sqrt(frac * (1 - frac) / replicas)
        else:
            raise ValueError("coupling must be 'grand' or 'corner'")
    else:
        if coupling != "grand":
            raise ValueError("permutation runs support the 'grand' coupling only")
        frac, se = _at_pair_ensemble(n, times, replicas, seed)
    exact_tv = None
    if mode == "exact":
        space = at_space(n) if model == "at" else sep_space(n, k)
        start = 0 if model == "at" else space.size - 1
        exact_tv = _exact_tv_curve(space, start, times, tail)
    report = ExperimentReport(
        name="tv-upper-curve",
        params={"model": model, "n": n, "k": k if model == "sep" else "",
                "replicas": replicas, "coupling": coupling, "mode": mode,
                "seed": seed},
        columns=("time", "uncoupled_fraction", "stderr", "exact_tv"))
    for i, t in enumerate(times):
        report.add_row(t, frac[i], se[i],
                       float("nan") if exact_tv is None else exact_tv[i])
    report.add_verdict("estimate-nonincreasing",
                       bool(np.all(np.diff(frac) <= 1e-12)),
                       "per-replica indicators are monotone under the coupling")
    if exact_tv is not None:
        ok = bool(np.all(frac + 4.0 * se >= exact_tv - 1e-9))
        report.add_verdict("dominates-exact-tv", ok,
                           "estimate + 4*SE covers the exact distance at "
                           "every grid time")
    return report


def area_audit(*, n: int = 16, k: int = 8, times=None, replicas: int = 300,
               eps: float = 0.25, seed: int = 0) -> ExperimentReport:
    """Audit of the coupled corner-flip pair from the extremal states.

    Checks the corner census imbalance stays in {0, 1, 2} at every event of
    every run, and that the mean area between the paths never grows (within
    four standard errors of the paired differences).  Also records when the
    mean area first passes the thresholds k^(1/2 - (i+1) eps) * n.
    """
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    times = np.sort(np.asarray(
        _default_grid(n, k, points=13, lo=0.0, hi=1.2) if times is None
        else np.asarray(times, dtype=float)))
    horizon = float(times[-1])
    areas = np.empty((replicas, len(times)))
    raising = np.empty((replicas, len(times)))
    lowering = np.empty((replicas, len(times)))
    audits = np.empty(replicas, dtype=bool)
    merged_at = np.empty(replicas)
    for r in range(replicas):
        trace = corner_flip_run(n, k, horizon, seed, sample_times=times,
                                run_index=r)
        areas[r] = trace.areas
        raising[r] = trace.raising_counts
        lowering[r] = trace.lowering_counts
        audits[r] = trace.audit_ok
        merged_at[r] = trace.merge_time
    mean_area = areas.mean(axis=0)
    se_area = areas.std(axis=0, ddof=1) / math.sqrt(replicas)
    frac_merged = (merged_at[:, None] <= times[None, :]).mean(axis=0)
    report = ExperimentReport(
        name="area-audit",
        params={"n": n, "k": k, "replicas": replicas, "eps": eps, "seed": seed},
        columns=("time", "mean_area", "stderr", "mean_raising",
                 "mean_lowering", "fraction_merged"))
    for i, t in enumerate(times):
        report.add_row(t, mean_area[i], se_area[i], raising.mean(axis=0)[i],
                       lowering.mean(axis=0)[i], frac_merged[i])
    report.add_verdict("corner-imbalance-in-0-1-2", bool(audits.all()),
                       f"audited at every event of {replicas} runs")
    diffs = np.diff(areas, axis=1)
    ok = True
    for j in range(diffs.shape[1]):
        d = diffs[:, j]
        margin = 4.0 * d.std(ddof=1) / math.sqrt(replicas)
        if d.mean() > margin:
            ok = False
    report.add_verdict("mean-area-nonincreasing", ok,
                       "paired differences within 4*SE at each step")
    crossings = []
    i = 0
    while True:
        expo = 0.5 - (i + 1) * eps
        if expo < -0.5:
            break
        thr = (k ** expo) * n
        hit = next((float(t) for t, a in zip(times, mean_area) if a <= thr),
                   None)
        crossings.append(f"{thr:.6g}@{'never' if hit is None else f'{hit:.6g}'}")
        i += 1
    report.add_verdict("threshold-crossings", True, "; ".join(crossings))
    return report


class _TvEvolution:
    """Incremental exact distance-to-uniform from the top configuration,
    using the symmetry-reduced space when k = n/2."""

    def __init__(self, n: int, k: int, tail: float = DEFAULT_TAIL):
        self.n, self.k, self.tail = n, k, tail
        self.t = 0.0
        if n == 2 * k:
            self._quot = SymmetricSepEvolver.build(n, k)
            self.probs = self._quot.start_top()
        else:
            self._quot = None
            space = sep_space(n, k)
            self._tables = space.swap_tables()
            self._size = space.size
            self.probs = np.zeros(space.size)
            self.probs[space.size - 1] = 1.0

    def advanced(self, probs: np.ndarray, dt: float) -> np.ndarray:
        if dt < 0:
            raise ValueError("cannot evolve backwards")
        if self._quot is not None:
            return self._quot.advance(probs, dt, self.tail)
        return _advance(probs, self._tables, 0, dt, self.tail)

    def advance_to(self, t: float) -> None:
        self.probs = self.advanced(self.probs, t - self.t)
        self.t = t

    def tv(self, probs: np.ndarray | None = None) -> float:
        p = self.probs if probs is None else probs
        if self._quot is not None:
            return self._quot.tv_to_uniform(p)
        return 0.5 * float(np.abs(p - 1.0 / self._size).sum())


def _mixing_times(n: int, k: int, eps_levels, rtol: float, tail: float):
    """T(eps) = first time the distance from the top start is <= eps.

    Sweeps forward over a grid, keeping snapshots, then bisects inside the
    bracketing segment; re-advancing always starts from the nearest snapshot
    at or below the query time, so each bisection costs about one segment."""
    ev = _TvEvolution(n, k, tail)
    t_hat = _time_scale(n, k)
    targets = sorted(eps_levels, reverse=True)
    snaps = [(0.0, ev.probs, ev.tv())]
    t = 0.3 * t_hat
    while True:
        ev.advance_to(t)
        snaps.append((t, ev.probs, ev.tv()))
        if snaps[-1][2] <= 0.9 * min(targets):
            break
        if t > 60.0 * t_hat:
            raise RuntimeError("distance did not drop along the sweep")
        t += 0.12 * t_hat
    results = {}
    for eps in targets:
        j = next(i for i, s in enumerate(snaps) if s[2] <= eps)
        if j == 0:
            results[eps] = 0.0
            continue
        lo, hi = snaps[j - 1][0], snaps[j][0]
        anchor_t, anchor_p = snaps[j - 1][0], snaps[j - 1][1]
        while hi - lo > rtol * t_hat:
            mid = 0.5 * (lo + hi)
            pm = ev.advanced(anchor_p, mid - anchor_t)
            if ev.tv(pm) > eps:
                lo, anchor_t, anchor_p = mid, mid, pm
            else:
                hi = mid
        results[eps] = 0.5 * (lo + hi)
    curve = [(s[0], s[2]) for s in snaps]
    return results, curve


def cutoff_profile(*, ns=(8, 12, 16, 20, 24), k="half",
                   eps_levels=(0.25, 0.5, 0.75), rtol: float = 5e-3,
                   tail: float = 1e-11) -> ExperimentReport:
    """Mixing-time profile of the particle dynamics from the top start.

    For each n it reports T(3/4), T(1/2), T(1/4), the window statistic
    (T(1/4) - T(3/4)) / T(1/2), and T(1/2) normalized by n^2 log(k) / (2 pi^2).
    A sharpening profile shows up as a strictly decreasing window statistic.
    """
    ns = tuple(int(v) for v in ns)
    levels = sorted(eps_levels)
    if len(levels) != 3:
        raise ValueError("expected three distance levels")
    report = ExperimentReport(
        name="cutoff-profile",
        params={"ns": ns, "k": k, "eps_levels": tuple(levels), "rtol": rtol},
        columns=("n", "k", "t_high", "t_half", "t_low", "window_ratio",
                 "normalized_half"))
    ratios = []
    ordered_ok = True
    for n in ns:
        kk = n // 2 if k == "half" else int(k)
        if k == "half" and n % 2:
            raise ValueError("half filling needs even n")
        tms, _ = _mixing_times(n, kk, levels, rtol, tail)
        t_low, t_half, t_high = tms[levels[0]], tms[levels[1]], tms[levels[2]]
        ratio = (t_low - t_high) / t_half
        normalized = t_half / _time_scale(n, kk)
        report.add_row(n, kk, t_high, t_half, t_low, ratio, normalized)
        ratios.append(ratio)
        ordered_ok = ordered_ok and t_low >= t_half >= t_high
    report.add_verdict("levels-ordered", ordered_ok,
                       "lower distance targets take longer")
    strictly = all(b < a for a, b in zip(ratios, ratios[1:]))
    report.add_verdict("window-ratio-strictly-decreasing", strictly,
                       " > ".join(f"{r:.4f}" for r in ratios))
    return report


def separation_profile(*, n: int = 6, k: int = 3, times=None,
                       tail: float = DEFAULT_TAIL) -> ExperimentReport:
    """Separation from the top configuration over a grid, checked against the
    single-state shortcut and the half-time product identity."""
    times = np.sort(np.asarray(
        _default_grid(n, k, points=12, lo=0.15, hi=2.5) if times is None
        else np.asarray(times, dtype=float)))
    report = ExperimentReport(
        name="separation-profile",
        params={"n": n, "k": k},
        columns=("time", "separation", "via_bottom", "halftime_gap"))
    splits = [separation_via_extremal(n, k, float(t), tail=tail) for t in times]
    for t, s in zip(times, splits):
        report.add_row(t, s.direct, s.via_bottom, s.halftime_gap)
    report.add_verdict(
        "bottom-attains-minimum", all(s.argmin_is_bottom for s in splits),
        "density minimized at the bottom configuration at every time")
    report.add_verdict(
        "shortcut-identity",
        all(abs(s.direct - max(0.0, s.via_bottom)) <= 1e-9 for s in splits),
        "separation equals 1 - P_t(bottom)/mu up to 1e-9")
    report.add_verdict(
        "halftime-product-identity",
        all(s.halftime_gap <= 1e-9 for s in splits),
        "P_2s(top->bottom) matches the meeting product")
    report.add_verdict(
        "nonincreasing",
        all(b.direct <= a.direct + 1e-12 for a, b in zip(splits, splits[1:])),
        "")
    return report


def _block_permutation(line: tuple[int, ...], block: range):
    """The within-block arrangement, provided the block holds its own labels."""
    vals = [line[x - 1] for x in block]
    if sorted(vals) != list(block):
        return None
    base = block[0] - 1
    return tuple(v - base for v in vals)


def three_phase_schedule(*, n: int = 8, delta: float = 0.5,
                         replicas: int = 2000, seed: int = 0,
                         mode: str = "exact",
                         tail: float = DEFAULT_TAIL) -> ExperimentReport:
    """Censored three-phase protocol from the identity.

    Cut sites are blocked on [0, t1) and [t2, t3), free in between.  While
    blocked, no label crosses a cut, so the coarse height grid over the cut
    positions is frozen; the free middle phase must flatten the expected grid
    volume below 2 n (K-1)^2 exp(-gap (t2 - t1)).  With mode="exact" (small n)
    the within-block laws at t1 and the coarse distance at t3 are also
    compared against exact evolution.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    scale = (n * n / (2.0 * math.pi ** 2)) * math.log(n)
    t1, t2, t3 = ((delta / 3.0) * scale, (1.0 + 2.0 * delta / 3.0) * scale,
                  (1.0 + delta) * scale)
    big_k = math.ceil(1.0 / delta)
    bp = BlockPartition(n, big_k)
    cut_sites = frozenset(c for c in bp.cuts[1:-1])
    all_sites = frozenset(range(1, n))
    scheme = CensoringScheme(n=n, pieces=(
        (t1, all_sites - cut_sites), (t2, all_sites),
        (t3, all_sites - cut_sites)))
    ident = Permutation.identity(n)
    sk0 = skeleton(ident, bp).scaled
    frozen1 = 0
    frozen3 = 0
    vols = np.empty(replicas)
    block_counts: list[dict] = [dict() for _ in bp.blocks()]
    semi_counts: dict[bytes, int] = {}
    for r in range(replicas):
        stream = sample_update_stream(n, t3, seed, r)
        _, samples = run_trajectory(ident, stream, scheme,
                                    sample_times=(t1, t2, t3))
        s1, s2, s3 = samples
        if np.array_equal(skeleton(s1, bp).scaled, sk0):
            frozen1 += 1
        if np.array_equal(skeleton(s3, bp).scaled, skeleton(s2, bp).scaled):
            frozen3 += 1
        vols[r] = float(volume(skeleton(s2, bp)))
        for b, blk in enumerate(bp.blocks()):
            key = _block_permutation(s1.line, blk)
            block_counts[b][key] = block_counts[b].get(key, 0) + 1
        key3 = semi_skeleton(s3, bp).scaled.tobytes()
        semi_counts[key3] = semi_counts.get(key3, 0) + 1
    mean_v = float(vols.mean())
    se_v = float(vols.std(ddof=1) / math.sqrt(replicas))
    bound = 2.0 * n * (big_k - 1) ** 2 * math.exp(-gap_eigenvalue(n) * (t2 - t1))
    report = ExperimentReport(
        name="three-phase-schedule",
        params={"n": n, "delta": delta, "replicas": replicas, "seed": seed,
                "mode": mode, "t1": t1, "t2": t2, "t3": t3, "blocks": big_k},
        columns=("quantity", "time", "value", "stderr"))
    report.add_row("mean_volume_t2", t2, mean_v, se_v)
    report.add_row("volume_bound_t2", t2, bound, 0.0)
    report.add_row("fraction_grid_frozen_phase1", t1, frozen1 / replicas, 0.0)
    report.add_row("fraction_grid_frozen_phase3", t3, frozen3 / replicas, 0.0)
    report.add_verdict("phase1-grid-frozen", frozen1 == replicas,
                       f"{frozen1}/{replicas} runs kept the cut grid fixed")
    report.add_verdict("phase3-grid-frozen", frozen3 == replicas,
                       f"{frozen3}/{replicas}")
    report.add_verdict("volume-bound-at-t2", mean_v <= bound + 4.0 * se_v,
                       f"mean {mean_v:.4g} vs bound {bound:.4g} (SE {se_v:.2g})")
    if mode == "exact":
        for b, blk in enumerate(bp.blocks()):
            size_b = len(blk)
            space_b = at_space(size_b)
            law = evolve(point_mass(space_b, 0), t1, tail=tail)
            emp_tv = 0.0
            for idx in range(space_b.size):
                emp = block_counts[b].get(space_b.state(idx), 0) / replicas
                emp_tv += abs(emp - float(law.probs[idx]))
            missing = sum(c for key, c in block_counts[b].items() if key is None)
            emp_tv = 0.5 * emp_tv + missing / replicas
            thr = 1.5 * math.sqrt(space_b.size / replicas)
            report.add_row(f"block{b}_marginal_tv_t1", t1, emp_tv, 0.0)
            report.add_verdict(
                f"block{b}-marginal-matches-exact", emp_tv <= thr,
                f"empirical vs exact within-block law: {emp_tv:.4f} <= {thr:.4f}")
        space = at_space(n)
        law3 = evolve(point_mass(space, 0), t3, scheme, tail=tail)
        ids: dict[bytes, int] = {}
        id_of = np.empty(space.size, dtype=np.int64)
        for j in range(space.size):
            keyb = semi_skeleton(Permutation(space.state(j)), bp).scaled.tobytes()
            id_of[j] = ids.setdefault(keyb, len(ids))
        nu_hat = np.bincount(id_of, weights=law3.probs, minlength=len(ids))
        mu_hat = np.bincount(id_of, minlength=len(ids)) / space.size
        semi_tv = 0.5 * float(np.abs(nu_hat - mu_hat).sum())
        emp_hat = np.zeros(len(ids))
        for keyb, c in semi_counts.items():
            emp_hat[ids[keyb]] += c / replicas
        emp_semi_tv = 0.5 * float(np.abs(emp_hat - mu_hat).sum())
        report.add_row("semiskeleton_tv_t3_exact", t3, semi_tv, 0.0)
        report.add_row("semiskeleton_tv_t3_mc", t3, emp_semi_tv, 0.0)
        thr = 1.5 * math.sqrt(len(ids) / replicas)
        report.add_verdict("semiskeleton-mc-matches-exact",
                           abs(emp_semi_tv - semi_tv) <= thr,
                           f"|{emp_semi_tv:.4f} - {semi_tv:.4f}| <= {thr:.4f}")
    return report


def wilson_sandwich(*, n: int = 8, k: int = 4, points: int = 32,
                    t_lo: float | None = None, t_hi: float | None = None,
                    tail: float = DEFAULT_TAIL) -> ExperimentReport:
    """Exact worst-start distance for the particle dynamics, sandwiched
    between the second-moment lower bound (from the top start) and the
    eigenvalue upper bound 10 k exp(-gap t)."""
    space = sep_space(n, k)
    scale = _time_scale(n, k)
    lo = 0.05 * scale if t_lo is None else t_lo
    hi = 2.6 * scale if t_hi is None else t_hi
    times = np.linspace(lo, hi, points)
    mu = uniform(space)
    dists = [point_mass(space, i) for i in range(space.size)]
    var_mu = uniform_fourier_variance(n, k)
    report = ExperimentReport(
        name="wilson-sandwich",
        params={"n": n, "k": k, "points": points},
        columns=("time", "worst_tv", "upper_bound", "lower_bound"))
    worst_prev = math.inf
    upper_ok = lower_ok = monotone_ok = True
    prev = 0.0
    for t in times:
        dt = float(t) - prev
        prev = float(t)
        dists = [evolve(d, dt, tail=tail) for d in dists]
        tvs = [total_variation(d, mu) for d in dists]
        worst = max(tvs)
        upper = wilson_upper_bound_particles(n, k, float(t))
        mean_top, var_top = fourier_moments(dists[space.size - 1])
        lower = chebyshev_tv_lower(mean_top, var_top, var_mu)
        report.add_row(t, worst, upper, lower)
        upper_ok = upper_ok and worst <= upper + 1e-12
        lower_ok = lower_ok and lower <= tvs[space.size - 1] + 1e-12
        monotone_ok = monotone_ok and worst <= worst_prev + 1e-12
        worst_prev = worst
    report.add_verdict("upper-bound-valid", upper_ok,
                       "worst-start distance below 10 k exp(-gap t)")
    report.add_verdict("lower-bound-valid", lower_ok,
                       "second-moment bound below the top-start distance")
    report.add_verdict("worst-tv-nonincreasing", monotone_ok, "")
    return report


REGISTRY = {
    "tv-upper-curve": tv_upper_curve,
    "area-audit": area_audit,
    "cutoff-profile": cutoff_profile,
    "separation-profile": separation_profile,
    "three-phase-schedule": three_phase_schedule,
    "wilson-sandwich": wilson_sandwich,
}
