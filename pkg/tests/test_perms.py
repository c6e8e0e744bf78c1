import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from shufflecut.perms import (
    BlockPartition, Comparison, Permutation, all_permutations, block_sort,
    compare, format_permutation, height_field, interpolated_semi_skeleton,
    leq, parse_permutation, semi_skeleton, skeleton, to_exclusion, volume,
)


perms_of = lambda n: st.permutations(range(1, n + 1)).map(
    lambda line: Permutation(tuple(line)))
small_perms = st.integers(2, 7).flatmap(perms_of)


def test_constructor_rejects_non_permutations():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))
    with pytest.raises(ValueError):
        Permutation((0, 1, 2))


def test_local_sorting_moves():
    p = Permutation((3, 1, 4, 2))
    assert p(1) == 3
    assert p.sorted_at(1).line == (1, 3, 4, 2)
    assert p.sorted_at(2).line == (3, 1, 4, 2)  # already increasing
    assert p.reverse_sorted_at(2).line == (3, 4, 1, 2)
    assert p.swapped_at(3).line == (3, 1, 2, 4)


def test_height_field_identity_n3():
    # n*h(x,y) = n*min(x,y) - x*y for the identity, worked by hand at n=3
    grid = height_field(Permutation.identity(3)).scaled
    expected = np.array([[0, 0, 0, 0],
                         [0, 2, 1, 0],
                         [0, 1, 2, 0],
                         [0, 0, 0, 0]])
    assert (grid == expected).all()
    hf = height_field(Permutation.identity(3))
    assert hf.value(1, 1) == Fraction(2, 3)


@given(small_perms)
def test_height_field_round_trips(p):
    assert height_field(p).to_permutation() == p


@given(small_perms)
def test_height_field_boundary_rows_vanish(p):
    grid = height_field(p).scaled
    assert (grid[0] == 0).all() and (grid[-1] == 0).all()
    assert (grid[:, 0] == 0).all() and (grid[:, -1] == 0).all()


def test_identity_is_maximal_and_reversal_minimal():
    for p in all_permutations(4):
        assert leq(Permutation.reversal(4), p)
        assert leq(p, Permutation.identity(4))
    assert compare(Permutation.identity(4), Permutation.reversal(4)) is Comparison.GREATER


def test_incomparable_pair():
    # h(1,1) orders one way and h(2,2) the other
    a, b = Permutation((2, 1, 3)), Permutation((1, 3, 2))
    assert compare(a, b) is Comparison.INCOMPARABLE
    assert not leq(a, b) and not leq(b, a)


@given(perms_of(4), perms_of(4), perms_of(4))
def test_order_is_a_partial_order(a, b, c):
    assert leq(a, a)
    if leq(a, b) and leq(b, a):
        assert a == b
    if leq(a, b) and leq(b, c):
        assert leq(a, c)


@given(small_perms, st.data())
def test_sorting_moves_are_monotone(p, data):
    site = data.draw(st.integers(1, p.n - 1))
    assert leq(p, p.sorted_at(site))
    assert leq(p.reverse_sorted_at(site), p)


def test_block_partition_cuts():
    bp = BlockPartition(n=5, num_blocks=2)
    assert bp.cuts == (0, 3, 5)
    assert bp.block_sizes == (3, 2)
    assert bp.blocks() == [range(1, 4), range(4, 6)]
    with pytest.raises(ValueError):
        BlockPartition(n=3, num_blocks=4)


def test_block_sort_example():
    bp = BlockPartition(n=4, num_blocks=2)
    assert block_sort(Permutation((3, 1, 4, 2)), bp).line == (1, 3, 2, 4)


def test_skeleton_and_volume_example():
    p, bp = Permutation((3, 1, 4, 2)), BlockPartition(n=4, num_blocks=2)
    sk = skeleton(p, bp)
    assert sk.scaled.shape == (3, 3)
    assert sk.scaled[1, 1] == 0  # one label <= 2 in the first block
    assert volume(sk) == 0
    semi = semi_skeleton(p, bp)
    assert semi.scaled.shape == (5, 3)
    assert tuple(semi.scaled[:, 1]) == (0, -2, 0, -2, 0)


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    perms_of(n), st.integers(1, n))))
def test_interpolation_matches_block_sorted_semi_skeleton(args):
    p, kk = args
    bp = BlockPartition(n=p.n, num_blocks=kk)
    direct = semi_skeleton(block_sort(p, bp), bp)
    closed = interpolated_semi_skeleton(bp, skeleton(p, bp))
    assert (direct.scaled == closed.scaled).all()


def test_block_sort_maximizes_over_block_content_class():
    # exhaustive at n=4: among permutations with the same labels in each
    # position block, the block-sorted representative dominates all others
    bp = BlockPartition(n=4, num_blocks=2)
    groups = {}
    for p in all_permutations(4):
        key = tuple(frozenset(p.line[b.start - 1: b.stop - 1]) for b in bp.blocks())
        groups.setdefault(key, []).append(p)
    assert len(groups) == 6
    for members in groups.values():
        top = block_sort(members[0], bp)
        for q in members:
            assert block_sort(q, bp) == top
            assert leq(q, top)


def test_interpolation_is_an_upper_envelope_over_the_skeleton_class():
    # permutations sharing a skeleton have semi-skeletons pointwise below the
    # interpolated grid of that skeleton (exhaustive at n=5, K=2)
    bp = BlockPartition(n=5, num_blocks=2)
    by_skeleton = {}
    for p in all_permutations(5):
        by_skeleton.setdefault(skeleton(p, bp).scaled.tobytes(), []).append(p)
    for members in by_skeleton.values():
        envelope = interpolated_semi_skeleton(bp, skeleton(members[0], bp))
        for q in members:
            assert (semi_skeleton(q, bp).scaled <= envelope.scaled).all()


def test_exclusion_projection():
    assert to_exclusion(Permutation((3, 1, 4, 2)), 2).occupancy() == (0, 1, 0, 1)
    assert to_exclusion(Permutation.identity(4), 2).occupancy() == (1, 1, 0, 0)
    with pytest.raises(ValueError):
        to_exclusion(Permutation.identity(4), 5)


@given(small_perms, st.data())
def test_projection_is_monotone(p, data):
    # build a comparable pair by walking p upward with sorting moves
    q = p
    for site in data.draw(st.lists(st.integers(1, p.n - 1), max_size=6)):
        q = q.sorted_at(site)
    k = data.draw(st.integers(0, p.n))
    a, b = to_exclusion(p, k), to_exclusion(q, k)
    assert all(u <= v for u, v in zip(a.scaled, b.scaled))


@given(small_perms)
def test_parse_format_round_trip(p):
    assert parse_permutation(format_permutation(p)) == p
