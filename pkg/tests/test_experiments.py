import numpy as np
import pytest

from shufflecut.experiments import (
    REGISTRY, area_audit, cutoff_profile, separation_profile,
    three_phase_schedule, tv_upper_curve, wilson_sandwich,
)


def test_registry_lists_all_experiments():
    assert list(REGISTRY) == ["tv-upper-curve", "area-audit", "cutoff-profile",
                              "separation-profile", "three-phase-schedule",
                              "wilson-sandwich"]
    assert REGISTRY["separation-profile"] is separation_profile


def test_separation_profile_report():
    rep = separation_profile(n=4, k=2)
    assert rep.passed
    assert rep.columns == ("time", "separation", "via_bottom", "halftime_gap")
    seps = [row[1] for row in rep.rows]
    assert all(b <= a + 1e-12 for a, b in zip(seps, seps[1:]))


def test_tv_upper_curve_exact_overlay():
    rep = tv_upper_curve(model="sep", n=5, k=2, replicas=400, mode="exact", seed=3)
    assert rep.passed
    for _, frac, err, exact in rep.rows:
        assert 0.0 <= exact <= frac + 4 * err + 1e-9
    with pytest.raises(ValueError):
        tv_upper_curve(model="nope")
    with pytest.raises(ValueError):
        tv_upper_curve(model="sep", n=4, k=4)


def test_tv_upper_curve_corner_coupling():
    rep = tv_upper_curve(model="sep", n=6, k=3, replicas=300, coupling="corner",
                         mode="exact", seed=5)
    assert rep.passed


def test_tv_upper_curve_permutation_model():
    rep = tv_upper_curve(model="at", n=5, replicas=300, mode="exact", seed=1)
    assert rep.passed


def test_area_audit_small():
    rep = area_audit(n=6, k=3, replicas=80, seed=2)
    assert rep.passed
    names = {v.name for v in rep.verdicts}
    assert {"corner-imbalance-in-0-1-2", "mean-area-nonincreasing"} <= names


def test_cutoff_profile_two_sizes():
    rep = cutoff_profile(ns=(8, 12), rtol=2e-2)
    assert rep.passed
    rows = {row[0]: row for row in rep.rows}
    assert set(rows) == {8, 12}
    n8, n12 = rows[8], rows[12]
    # columns: n, k, t_high, t_half, t_low, window_ratio, normalized_half
    assert n8[2] <= n8[3] <= n8[4]
    assert n8[5] > n12[5] > 0
    assert 0.2 < n12[6] < 5.0  # normalized location is order one


def test_three_phase_schedule_exact_mode():
    rep = three_phase_schedule(n=6, delta=0.5, replicas=400, seed=1, mode="exact")
    assert rep.passed
    quantities = [row[0] for row in rep.rows]
    assert "mean_volume_t2" in quantities and "volume_bound_t2" in quantities
    by_name = {row[0]: row for row in rep.rows}
    assert (by_name["mean_volume_t2"][2]
            <= by_name["volume_bound_t2"][2] + 4 * by_name["mean_volume_t2"][3])


def test_wilson_sandwich_report():
    rep = wilson_sandwich(n=6, k=3, points=9)
    assert rep.passed
    for _, worst, upper, lower in rep.rows:
        assert lower - 1e-9 <= worst <= upper + 1e-9
