import numpy as np
import pytest

from shufflecut.paths import LatticePath
from shufflecut.perms import Permutation, all_permutations, leq, to_exclusion
from shufflecut.statespace import (
    STATE_CAP_ENV, StateCapExceeded, at_reversal_conjugation, at_space,
    at_to_sep_projection, sep_flip_reflect, sep_space, state_cap,
)


def test_at_space_enumeration():
    space = at_space(3)
    assert space.size == 6
    assert space.state(0) == (1, 2, 3)  # lexicographic, identity first
    assert space.state(5) == (3, 2, 1)
    for i in range(space.size):
        assert space.index_of(space.state(i)) == i


def test_sep_space_enumeration():
    space = sep_space(4, 2)
    assert space.size == 6
    assert space.state(0) == (0, 0, 1, 1)  # bottom configuration
    assert space.state(5) == (1, 1, 0, 0)  # top configuration
    for i in range(space.size):
        assert space.index_of(space.state(i)) == i
    with pytest.raises(ValueError):
        sep_space(4, 5)


def test_sep_orders_agree_with_path_order():
    # lex position in the enumeration is not the partial order, but the
    # extremes must be the path-order extremes
    space = sep_space(5, 2)
    paths = [LatticePath.from_occupancy(space.state(i)) for i in range(space.size)]
    bottom, top = paths[0], paths[-1]
    for p in paths:
        assert all(b <= v <= t for b, v, t in zip(bottom.scaled, p.scaled, top.scaled))


def test_swap_tables_small():
    space = sep_space(4, 2)
    tab = space.swap_tables()
    assert tab.shape == (6, 3)
    i_top = space.index_of((1, 1, 0, 0))
    assert tab[i_top, 1] == space.index_of((1, 0, 1, 0))  # swap sites 2,3
    assert tab[i_top, 0] == i_top  # equal entries: swap is a no-op

    at = at_space(3)
    at_tab = at.swap_tables()
    assert at_tab[0, 0] == at.index_of((2, 1, 3))
    # swapping is an involution
    for space_, t in ((space, tab), (at, at_tab)):
        for c in range(t.shape[1]):
            assert (t[t[:, c], c] == np.arange(space_.size)).all()


def test_state_cap(monkeypatch):
    monkeypatch.setenv(STATE_CAP_ENV, "5")
    assert state_cap() == 5
    with pytest.raises(StateCapExceeded) as err:
        at_space(3)
    assert err.value.size == 6 and err.value.cap == 5
    assert STATE_CAP_ENV in str(err.value)
    with pytest.raises(StateCapExceeded):
        sep_space(6, 3)
    sep_space(4, 1)  # 4 states, under the cap


def test_flip_reflect_symmetry():
    space = sep_space(6, 3)
    fr = sep_flip_reflect(space)
    assert (fr[fr] == np.arange(space.size)).all()
    # both extremal configurations are mirror-fixed
    assert fr[0] == 0 and fr[space.size - 1] == space.size - 1
    # mirror-symmetric occupancies are determined by their left half
    assert int((fr == np.arange(space.size)).sum()) == 2 ** 3
    # conjugating the swap at site x gives the swap at site n-x
    tab = space.swap_tables()
    n = space.n
    for x in range(1, n):
        assert (fr[tab[:, x - 1]] == tab[fr, (n - x) - 1]).all()
    with pytest.raises(ValueError):
        sep_flip_reflect(sep_space(5, 2))


def test_reversal_conjugation():
    space = at_space(4)
    conj = at_reversal_conjugation(space)
    assert (conj[conj] == np.arange(space.size)).all()
    assert conj[space.index_of((1, 2, 3, 4))] == space.index_of((1, 2, 3, 4))
    assert conj[space.index_of((4, 3, 2, 1))] == space.index_of((4, 3, 2, 1))
    # rho o sigma o rho worked by hand
    three = at_space(3)
    c3 = at_reversal_conjugation(three)
    assert c3[three.index_of((2, 1, 3))] == three.index_of((1, 3, 2))
    tab = space.swap_tables()
    for x in range(1, 4):
        assert (conj[tab[:, x - 1]] == tab[conj, (4 - x) - 1]).all()


def test_projection_index_map():
    space = at_space(4)
    for k in (1, 2, 3):
        proj = at_to_sep_projection(space, k)
        target = sep_space(4, k)
        for i in range(space.size):
            image = to_exclusion(Permutation(space.state(i)), k)
            assert proj[i] == target.index_of(image.occupancy())


def test_projection_respects_order():
    space = at_space(4)
    proj = at_to_sep_projection(space, 2)
    target = sep_space(4, 2)
    perms = list(all_permutations(4))
    for a in perms[:8]:
        for b in perms:
            if leq(a, b):
                pa = LatticePath.from_occupancy(target.state(proj[space.index_of(a.line)]))
                pb = LatticePath.from_occupancy(target.state(proj[space.index_of(b.line)]))
                assert all(u <= v for u, v in zip(pa.scaled, pb.scaled))
