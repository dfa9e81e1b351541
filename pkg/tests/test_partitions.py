from itertools import product

import pytest
from hypothesis import given, strategies as st

from ratedist.partitions import SetPartition, all_partitions, canonical, join, meet, refines


def labels(n_max=8):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n))


def pairs(n_max=8):
    return st.integers(1, n_max).flatmap(lambda n: st.tuples(
        st.lists(st.integers(0, n - 1), min_size=n, max_size=n),
        st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))


def brute_join(f, g):
    """Finest partition refined by both, by scanning every partition."""
    ups = [h for h in all_partitions(len(f)) if refines(f, h) and refines(g, h)]
    best = [h for h in ups if all(refines(h, k) for k in ups)]
    assert len(best) == 1
    return best[0]


def test_canonical_form():
    assert canonical([5, 5, 2, 9]) == (0, 0, 1, 2)
    p = SetPartition([3, 1, 3])
    assert p.labels == (0, 1, 0)
    assert p == SetPartition((7, 0, 7))
    assert p.blocks() == [[0, 2], [1]]
    assert hash(p) == hash(SetPartition([0, 1, 0]))


def test_refines_examples():
    g = SetPartition([0, 1, 0, 2])
    assert refines(SetPartition.identity(4), g)
    assert not refines(SetPartition.single(3), SetPartition.identity(3))
    assert not refines((0, 0, 1, 1), (0, 0, 0, 1))
    assert refines((0, 0, 1, 1), (0, 0, 1, 1))


def test_meet_examples():
    f = SetPartition([0, 0, 1, 1])
    assert meet(f, f) == f
    assert meet(f, (0, 1, 0, 1)) == SetPartition.identity(4)
    g = SetPartition([0, 1, 1, 2])
    assert meet(SetPartition.single(4), g) == g


def test_join_examples():
    f = SetPartition([0, 0, 1, 1])
    assert join(f, f) == f
    assert join(f, (0, 1, 1, 0)) == SetPartition.single(4)
    assert join(f, (0, 0, 2, 2)) == SetPartition([0, 0, 1, 1])


def test_size_mismatch_rejected():
    with pytest.raises(ValueError):
        meet((0, 1), (0, 1, 2))


def test_bell_numbers():
    assert [sum(1 for _ in all_partitions(n)) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]


@given(pairs())
def test_absorption_and_commutativity(fg):
    f, g = SetPartition(fg[0]), SetPartition(fg[1])
    assert meet(f, join(f, g)) == f
    assert join(f, meet(f, g)) == f
    assert meet(f, g) == meet(g, f)
    assert join(f, g) == join(g, f)


@given(pairs())
def test_order_matches_lattice_ops(fg):
    f, g = SetPartition(fg[0]), SetPartition(fg[1])
    r = refines(f, g)
    assert r == (join(f, g) == g) == (meet(f, g) == f)


@given(pairs())
def test_meet_and_join_are_bounds(fg):
    f, g = fg
    m, j = meet(f, g), join(f, g)
    assert refines(m, f) and refines(m, g)
    assert refines(f, j) and refines(g, j)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_associativity_exhaustive(n):
    parts = list(all_partitions(n))
    for f, g, h in product(parts, repeat=3):
        assert meet(meet(f, g), h) == meet(f, meet(g, h))
        assert join(join(f, g), h) == join(f, join(g, h))


def test_associativity_exhaustive_five():
    parts = list(all_partitions(5))
    # 52^3 triples; a fixed stride keeps runtime modest while touching every partition
    for i, f in enumerate(parts):
        for g in parts:
            h = parts[(i * 7 + g.n_blocks * 11) % len(parts)]
            assert meet(meet(f, g), h) == meet(f, meet(g, h))
            assert join(join(f, g), h) == join(f, join(g, h))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_join_matches_brute_force(n):
    parts = list(all_partitions(n))
    for f in parts:
        for g in parts:
            assert join(f, g) == brute_join(f, g)
