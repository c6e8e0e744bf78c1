import itertools
from fractions import Fraction

import numpy as np
import pytest

from shufflecut.exact import (
    evolve, point_mass, total_variation, uniform,
)
from shufflecut.inequalities import (
    censoring_comparison, dominance_check, fkg_check, holley_check,
    is_increasing_density, is_increasing_event, label_erased,
    order_leq_matrix, tv_decomposition, up_set_mask,
)
from shufflecut.perms import (
    BlockPartition, Permutation, all_permutations, leq, semi_skeleton,
)
from shufflecut.statespace import at_space, sep_space


def test_order_matrix_matches_pairwise_comparison():
    space = at_space(4)
    m = order_leq_matrix(space)
    for i in (0, 3, 11, 23):
        a = Permutation(space.state(i))
        for j in range(space.size):
            assert m[i, j] == leq(a, Permutation(space.state(j)))


def test_order_matrix_extremes_sep():
    space = sep_space(5, 2)
    m = order_leq_matrix(space)
    assert m[0].all()  # bottom below everything
    assert m[:, space.size - 1].all()  # top above everything
    assert np.diag(m).all()


def test_increasing_density_detection():
    space = sep_space(4, 2)
    assert is_increasing_density(uniform(space))
    assert is_increasing_density(evolve(point_mass(space, space.size - 1), 0.4))
    assert not is_increasing_density(point_mass(space, 0))


def test_up_sets():
    space = sep_space(4, 2)
    i_mid = space.index_of((1, 0, 1, 0))
    mask = up_set_mask(space, i_mid)
    assert set(np.flatnonzero(mask)) == {i_mid, space.index_of((1, 1, 0, 0))}
    assert is_increasing_event(space, mask)
    assert not is_increasing_event(space, ~mask)


def test_dominance_by_max_flow():
    space = sep_space(5, 2)
    from_top = evolve(point_mass(space, space.size - 1), 0.5)
    mu = uniform(space)
    assert dominance_check(from_top, mu)
    assert dominance_check(mu, point_mass(space, 0))
    assert not dominance_check(point_mass(space, 0), mu)
    assert dominance_check(mu, mu)


def test_dominance_agrees_with_up_set_criterion():
    # Strassen: p dominates q iff p(U) >= q(U) for every up-set U; on a small
    # space the up-sets generated by single states decide it for our laws
    space = sep_space(4, 2)
    rng = np.random.default_rng(3)
    m = order_leq_matrix(space)
    for _ in range(25):
        w = rng.dirichlet(np.ones(space.size))
        v = rng.dirichlet(np.ones(space.size))
        p = point_mass(space, 0).copy()
        p.probs[:] = w
        q = point_mass(space, 0).copy()
        q.probs[:] = v
        flow = dominance_check(p, q)
        upsets = [np.asarray(m[i, :], dtype=bool) for i in range(space.size)]
        # all up-sets: unions of principal ones; enumerate via subsets
        holds = True
        for r in range(1, space.size + 1):
            for combo in itertools.combinations(range(space.size), r):
                u = np.any([upsets[i] for i in combo], axis=0)
                if w[u].sum() < v[u].sum() - 1e-12:
                    holds = False
                    break
            if not holds:
                break
        assert flow == holds


def test_fkg_example_by_hand():
    # f = indicator of the up-set of (1,0,1,0), g = indicator of the top:
    # E[fg] = 1/6, E[f] E[g] = (1/3)(1/6) = 1/18
    space = sep_space(4, 2)
    f = up_set_mask(space, space.index_of((1, 0, 1, 0))).astype(int)
    g = up_set_mask(space, space.size - 1).astype(int)
    res = fkg_check(space, f, g)
    assert res.holds
    assert res.lhs == Fraction(1, 6) and res.rhs == Fraction(1, 18)


def test_fkg_rejects_non_increasing_input():
    space = sep_space(4, 2)
    g = up_set_mask(space, space.size - 1).astype(int)
    with pytest.raises(ValueError):
        fkg_check(space, 1 - g, g)


def test_fkg_random_up_sets_on_permutations():
    space = at_space(4)
    rng = np.random.default_rng(11)
    for _ in range(40):
        seeds = rng.integers(0, space.size, size=3)
        f = np.any([up_set_mask(space, int(i)) for i in seeds[:2]], axis=0)
        g = np.any([up_set_mask(space, int(i)) for i in seeds[1:]], axis=0)
        assert fkg_check(space, f.astype(int), g.astype(int)).holds


def test_holley_example_by_hand():
    # A = {top} inside B = up-set of (0,1,1,0); f = scaled height at x=2
    space = sep_space(4, 2)
    event_b = up_set_mask(space, space.index_of((0, 1, 1, 0)))
    event_a = up_set_mask(space, space.size - 1)
    f = [int(4 * (s[0] + s[1]) - 4) for s in
         (space.state(i) for i in range(space.size))]
    res = holley_check(space, event_a, event_b, f)
    assert res.holds
    assert res.mean_given_a == 4 and res.mean_given_b == Fraction(4, 3)


def test_holley_validation():
    space = sep_space(4, 2)
    top = up_set_mask(space, space.size - 1)
    other = up_set_mask(space, space.index_of((1, 0, 1, 0)))
    with pytest.raises(ValueError):  # A must sit inside B
        holley_check(space, other | ~other, top, [0] * space.size)
    with pytest.raises(ValueError):  # permutation spaces are not a lattice
        holley_check(at_space(3), np.ones(6, bool), np.ones(6, bool), [0] * 6)


def test_holley_random_nested_up_sets():
    # principal up-sets up(v) inside up(w) for w <= v are min-closed
    from shufflecut.paths import LatticePath, lattice_max

    space = sep_space(6, 3)
    rng = np.random.default_rng(7)
    heights_sum = [sum(space.state(i)[j] * (space.n - j) for j in range(space.n))
                   for i in range(space.size)]
    for _ in range(25):
        i, j = rng.integers(0, space.size, size=2)
        w = LatticePath.from_occupancy(space.state(int(j)))
        v = lattice_max(LatticePath.from_occupancy(space.state(int(i))), w)
        a = up_set_mask(space, space.index_of(v.occupancy()))
        b = up_set_mask(space, int(j))
        assert holley_check(space, a, b, heights_sum).holds


def test_censoring_comparison_oracle():
    res = censoring_comparison(3, (1, 2, 1), omit=(2,))
    assert res.full_tv == Fraction(1, 6)
    assert res.omitted_tv == Fraction(1, 3)
    assert res.holds
    with pytest.raises(ValueError):
        censoring_comparison(3, (1, 2), omit=(5,))


def test_censoring_comparison_random_omissions():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(3, 5))
        seq = tuple(int(x) for x in rng.integers(1, n, size=rng.integers(1, 7)))
        size = int(rng.integers(0, len(seq) + 1))
        omit = tuple(int(i) for i in rng.choice(len(seq), size=size, replace=False))
        assert censoring_comparison(n, seq, omit).holds


def test_label_erasure_point_mass():
    space = at_space(4)
    bp = BlockPartition(n=4, num_blocks=2)
    erased = label_erased(point_mass(space, 0), bp)
    support = {space.state(i): p for i, p in enumerate(erased.probs) if p > 0}
    assert support == {(1, 2, 3, 4): 0.25, (2, 1, 3, 4): 0.25,
                       (1, 2, 4, 3): 0.25, (2, 1, 4, 3): 0.25}


def test_label_erasure_is_idempotent_and_semi_skeleton_safe():
    space = at_space(4)
    bp = BlockPartition(n=4, num_blocks=2)
    dist = evolve(point_mass(space, 7), 0.3)
    once = label_erased(dist, bp)
    twice = label_erased(once, bp)
    assert np.abs(once.probs - twice.probs).max() < 1e-15
    # relabeling within label blocks never moves the semi-skeleton
    for p in all_permutations(4):
        for tau in ((2, 1, 3, 4), (1, 2, 4, 3), (2, 1, 4, 3)):
            composed = Permutation(tuple(tau[v - 1] for v in p.line))
            assert (semi_skeleton(composed, bp).scaled
                    == semi_skeleton(p, bp).scaled).all()


def test_right_composition_breaks_the_semi_skeleton():
    # permuting positions inside a block does change h(x, y_j) in general
    bp = BlockPartition(n=4, num_blocks=2)
    tau = (2, 1, 3, 4)
    broken = [p for p in all_permutations(4)
              if (semi_skeleton(Permutation(tuple(p.line[tau[i] - 1]
                                                  for i in range(4))), bp).scaled
                  != semi_skeleton(p, bp).scaled).any()]
    assert broken  # erasure must compose labels on the left, not positions


def test_tv_decomposition_bounds_the_distance():
    space = at_space(4)
    bp = BlockPartition(n=4, num_blocks=2)
    mu = uniform(space)
    for t in (0.2, 0.8):
        dist = evolve(point_mass(space, 0), t)
        dec = tv_decomposition(dist, bp)
        assert total_variation(dist, mu) <= dec.bound + 1e-12
        # the skeleton part is exactly the erased law's distance to uniform
        erased = label_erased(dist, bp)
        assert abs(dec.skeleton_tv - total_variation(erased, mu)) < 1e-12
        assert abs(dec.erasure_tv - total_variation(dist, erased)) < 1e-12
        # independent grouping of states by their semi-skeleton
        groups = {}
        for i in range(space.size):
            key = semi_skeleton(Permutation(space.state(i)), bp).scaled.tobytes()
            groups.setdefault(key, []).append(i)
        direct = 0.5 * sum(abs(dist.probs[idx].sum() - len(idx) / space.size)
                           for idx in map(np.array, groups.values()))
        assert abs(dec.skeleton_tv - direct) < 1e-12
