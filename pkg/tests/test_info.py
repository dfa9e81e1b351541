import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ratedist.info import (InvalidPmfError, JointPmf, cond_entropy, cond_mutual_info, entropy,
                           grid_size, mutual_info, rational_grid, rational_lattice,
                           simplex_grid, simplex_lattice)


def brute_entropy(p):
    return -sum(v * math.log2(v) for v in np.ravel(p) if v > 0)


def random_joint(seed, shape, names):
    r = np.random.default_rng(seed)
    m = r.dirichlet(np.full(int(np.prod(shape)), 0.5)).reshape(shape)
    return JointPmf(m, names)


joints = st.builds(
    random_joint, st.integers(0, 10**6),
    st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4)),
    st.just(("A", "B", "C")))


def test_entropy_examples():
    assert entropy(JointPmf(np.full(4, 0.25), ["X"])) == pytest.approx(2.0, abs=1e-15)
    assert entropy(JointPmf([0, 1, 0], ["X"])) == 0.0
    assert entropy(JointPmf([0.5, 0.25, 0.25], ["X"])) == pytest.approx(1.5, abs=1e-15)


def test_invalid_pmfs_rejected():
    with pytest.raises(InvalidPmfError):
        JointPmf([0.5, 0.6], ["X"])
    with pytest.raises(InvalidPmfError):
        JointPmf([1.5, -0.5], ["X"])
    with pytest.raises(InvalidPmfError):
        JointPmf(np.full((2, 2), 0.25), ["X", "X"])
    with pytest.raises(InvalidPmfError):
        entropy(np.array([0.3, 0.3]))


def test_sum_tolerance_edge():
    JointPmf([0.5, 0.5 + 5e-13], ["X"])
    with pytest.raises(InvalidPmfError):
        JointPmf([0.5, 0.5 + 5e-12], ["X"])


def test_mutual_info_examples():
    indep = JointPmf(np.outer([0.3, 0.7], [0.6, 0.4]), ["A", "B"])
    assert mutual_info(indep, "A", "B") == pytest.approx(0.0, abs=1e-12)
    ub = JointPmf([0.5, 0.5], ["B"])
    assert cond_mutual_info(ub, "B", "B") == pytest.approx(1.0)
    ux = JointPmf([[0.5, 0], [0, 0.5]], ["U", "X"])
    assert mutual_info(ux, "U", "X") == pytest.approx(1.0)


def test_overlapping_sets_rejected():
    p = random_joint(1, (2, 2, 2), ("A", "B", "C"))
    with pytest.raises(ValueError):
        cond_mutual_info(p, ["A", "B"], ["B"], [])
    with pytest.raises(ValueError):
        cond_mutual_info(p, ["A"], ["B"], ["A"])
    with pytest.raises(ValueError):
        cond_entropy(p, ["A"], ["A"])


def test_marginal_keeps_requested_order():
    p = random_joint(3, (2, 3, 4), ("A", "B", "C"))
    m = p.marginal(["C", "A"])
    assert m.names == ("C", "A") and m.shape == (4, 2)
    np.testing.assert_allclose(m.mass, p.mass.sum(axis=1).T)


def test_mutual_info_against_direct_sum():
    p = random_joint(7, (3, 4), ("A", "B"))
    m = p.mass
    pa, pb = m.sum(1), m.sum(0)
    direct = sum(m[i, j] * math.log2(m[i, j] / (pa[i] * pb[j]))
                 for i, j in product(range(3), range(4)) if m[i, j] > 0)
    assert mutual_info(p, "A", "B") == pytest.approx(direct, abs=1e-12)


@given(joints)
def test_chain_rule(p):
    lhs = entropy(p, ["A", "B"])
    rhs = entropy(p, ["A"]) + cond_entropy(p, ["B"], ["A"])
    assert lhs == pytest.approx(rhs, abs=1e-10)


@given(joints)
def test_conditional_mi_nonnegative(p):
    assert cond_mutual_info(p, ["A"], ["B"], ["C"]) >= 0.0
    assert mutual_info(p, ["A"], ["B", "C"]) >= 0.0


def test_conditional_mi_nonnegative_1000_random():
    r = np.random.default_rng(0)
    for s in range(1000):
        shape = tuple(r.integers(1, 5, size=3))
        p = random_joint(s, shape, ("A", "B", "C"))
        assert cond_mutual_info(p, "A", "B", "C") >= 0.0


@given(joints)
def test_entropy_matches_brute_force(p):
    assert entropy(p) == pytest.approx(brute_entropy(p.mass), abs=1e-12)


def test_simplex_grid_examples():
    g = [tuple(v) for v in simplex_grid(2, 2)]
    assert sorted(g) == [(0, 1), (0.5, 0.5), (1, 0)]
    assert len(list(simplex_grid(3, 1))) == 3
    assert len(list(simplex_grid(3, 4))) == 15


@pytest.mark.parametrize("k,m", [(1, 5), (2, 7), (3, 4), (4, 6), (5, 3)])
def test_simplex_lattice_is_exact_and_ordered(k, m):
    L = simplex_lattice(k, m)
    assert len(L) == math.comb(m + k - 1, k - 1) == grid_size(k, m)
    assert np.all(L.sum(axis=1) == m)
    assert len({tuple(r) for r in L}) == len(L)
    assert [tuple(r) for r in L] == sorted(tuple(r) for r in L)


@pytest.mark.parametrize("k,m", [(2, 6), (3, 5), (4, 4)])
def test_grid_entropy_bounds(k, m):
    for p in simplex_grid(k, m):
        h = entropy(JointPmf(p, ["X"]))
        assert -1e-12 <= h <= math.log2(k) + 1e-12


def test_rational_lattice_covers_all_denominators():
    counts, dens = rational_lattice(3, 4)
    fr = {tuple(c / d for c in row) for row, d in zip(counts, dens)}
    for den in range(1, 5):
        for row in simplex_lattice(3, den):
            assert tuple(row / den) in fr
    assert len(fr) == len(counts)
    assert np.allclose(rational_grid(3, 4).sum(axis=1), 1)
