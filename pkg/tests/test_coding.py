import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import multinomial

from ratedist.channel import parse_channel
from ratedist.coding import (MartonRates, _box_logprob, birthday_bound, birthday_formula,
                             birthday_mc, cell_bounds, gen_marton_codebook,
                             independence_oracle, is_typical, sim_1dc, sset_stats, word_count)
from ratedist.errors import GuardError
from ratedist.info import JointPmf


def dsbs(flip, nx=1):
    """U constant, (Z1, Z2) a doubly symmetric binary pair, X a dummy axis."""
    m = np.array([[(1 - flip) / 2, flip / 2], [flip / 2, (1 - flip) / 2]])
    return JointPmf(m[None, :, :, None] * np.full(nx, 1 / nx), ("U", "Z1", "Z2", "X"))


def brute_independence(pA, subset, n, s):
    """Loop-by-loop enumeration of the shifted-position pair law."""
    k = len(pA)
    joint = Counter()
    total = 0.0
    for seq in itertools.product(range(k), repeat=n):
        pos = [i for i, a in enumerate(seq) if a in subset]
        if not pos:
            continue
        w = math.prod(pA[a] for a in seq)
        total += w
        for i in pos:
            joint[seq[i], seq[(i + s) % n]] += w / len(pos)
    P = np.zeros((k, k))
    for (a, b), v in joint.items():
        P[a, b] = v / total
    return P


# birthday

def test_birthday_examples():
    assert birthday_bound(1, 0.3) == (0.0, pytest.approx(0.09))
    exact, bound = birthday_bound(2, 0.5)
    assert exact == pytest.approx(0.25, abs=1e-15) and bound == 1.0
    assert birthday_bound(50, 0.0) == (0.0, 0.0)
    for bad in [(0, 0.1), (2.5, 0.1), (3, -0.1), (3, 1.5)]:
        with pytest.raises(ValueError):
            birthday_bound(*bad)


@given(st.integers(1, 10_000), st.integers(0, 99))
def test_birthday_exact_below_bound(m, k):
    p = (k + 1) / 100 / m ** 0.5 if k % 2 else k / 99
    exact, bound = birthday_bound(m, p)
    assert 0.0 <= exact <= 1.0
    assert exact <= bound + 1e-15


@given(st.integers(1, 300), st.floats(0, 1))
def test_birthday_closed_form(m, p):
    exact, _ = birthday_bound(m, p)
    assert exact == pytest.approx(birthday_formula(m, p), abs=1e-12)


def test_birthday_against_monte_carlo():
    exact, _ = birthday_bound(32, 0.05)
    est, se = birthday_mc(32, 0.05, 100_000, seed=3)
    assert abs(est - exact) <= 3 * se


# independence of the shifted position

def test_independence_hand_example():
    assert independence_oracle([0.5, 0.5], [1], 2, 1) <= 1e-15
    P = brute_independence([0.5, 0.5], {1}, 2, 1)
    # the sampled letter is always 1; the shifted one is 0 with probability 2/3
    np.testing.assert_allclose(P, [[0, 0], [2 / 3, 1 / 3]], atol=1e-15)


def test_independence_full_subset():
    assert independence_oracle([0.2, 0.3, 0.5], [0, 1, 2], 4, 3) <= 1e-15


def test_independence_three_letters():
    assert independence_oracle([0.5, 0.3, 0.2], [1, 2], 5, 2) <= 1e-12


@given(st.integers(0, 10**6), st.integers(2, 3), st.integers(2, 5))
def test_independence_matches_brute_force(seed, k, n):
    r = np.random.default_rng(seed)
    pA = r.dirichlet(np.ones(k))
    sub = {int(a) for a in r.choice(k, size=int(r.integers(1, k + 1)), replace=False)}
    s = int(r.integers(1, n))
    P = brute_independence(pA, sub, n, s)
    dev = float(np.abs(P - np.outer(P.sum(1), P.sum(0))).max())
    assert independence_oracle(pA, sorted(sub), n, s) == pytest.approx(dev, abs=1e-14)
    assert dev <= 1e-12


def test_independence_validation():
    with pytest.raises(GuardError):
        independence_oracle([0.25] * 4, [1], 3, 1)
    with pytest.raises(GuardError):
        independence_oracle([0.5, 0.5], [1], 8, 1)
    for args in [([0.5, 0.6], [1], 3, 1), ([0.5, 0.5], [], 3, 1), ([0.5, 0.5], [2], 3, 1),
                 ([0.5, 0.5], [1], 3, 0), ([0.5, 0.5], [1], 3, 3), ([1.0, 0.0], [1], 3, 1)]:
        with pytest.raises(ValueError):
            independence_oracle(*args)


# typicality

def test_cell_bounds():
    lo, hi = cell_bounds(10, [0.5, 0.3, 0.2], 0.2)
    np.testing.assert_array_equal(lo, [4, 3, 2])
    np.testing.assert_array_equal(hi, [6, 3, 2])
    assert is_typical([5, 3, 2], [0.5, 0.3, 0.2], 0.2)[0]
    assert not is_typical([6, 2, 2], [0.5, 0.3, 0.2], 0.2)[0]
    assert is_typical([[5, 0], [4, 1]], [1.0, 0.0], 0.5).tolist() == [True, False]


@given(st.integers(0, 10**6), st.integers(0, 9), st.integers(2, 3))
def test_box_probability_matches_enumeration(seed, N, k):
    r = np.random.default_rng(seed)
    p = r.dirichlet(np.ones(k))
    lo = r.integers(0, 3, size=k)
    hi = lo + r.integers(0, 5, size=k)
    want = 0.0
    for c in itertools.product(range(N + 1), repeat=k):
        if sum(c) == N and all(a <= v <= b for v, a, b in zip(c, lo, hi)):
            want += multinomial.pmf(c, N, p)
    got = math.exp(_box_logprob(N, p, lo, hi))
    assert got == pytest.approx(want, abs=1e-12)


def test_word_count():
    assert word_count(10, 0.0) == 1
    assert word_count(10, 0.3) == 8
    assert word_count(3, 1 / 3) == 2
    with pytest.raises(GuardError):
        word_count(100, 1.0)
    with pytest.raises(ValueError):
        word_count(10, -0.1)


# superposition coding

@pytest.fixture
def bsc():
    return parse_channel("alphabet X 2\noutput Y stoch 2\n0.95 0.05\n0.05 0.95\n"
                         "output Z det 0 0\n")


def test_constant_side_output_has_no_disturbance(d1):
    pux = [[0.5, 0.5, 0.0, 0.0]]
    rep = sim_1dc(d1, pux, n=60, R0=0.0, R1=0.3, eps=0.3, trials=20, seed=1)
    assert rep["disturbance"].estimate == 0.0
    assert rep["I(X;Z|U)"].estimate == 0.0


def test_error_rate_transition(d1):
    pux = np.full((1, 4), 0.25)
    cap = sim_1dc(d1, pux, 20, 0.0, 0.1, 0.3, 1, seed=0)["I(X;Y|U)"].estimate
    assert cap == pytest.approx(1.5)
    lo = sim_1dc(d1, pux, 200, 0.0, cap - 0.2, 0.3, 60, seed=0)
    hi = sim_1dc(d1, pux, 200, 0.0, cap + 0.2, 0.3, 60, seed=0)
    assert lo["error_rate"].estimate < 0.15
    assert hi["error_rate"].estimate > 0.85


def test_lazy_and_explicit_decoders_agree(bsc):
    pux = [[0.5, 0.5]]
    kw = dict(n=40, R0=0.0, R1=0.2, eps=0.4, trials=150, seed=5)
    lazy = sim_1dc(bsc, pux, method="lazy", **kw)["error_rate"]
    expl = sim_1dc(bsc, pux, method="explicit", **kw)["error_rate"]
    # two estimates of one probability: their intervals must overlap
    assert lazy.ci_low <= expl.ci_high and expl.ci_low <= lazy.ci_high


def test_sim_report_shape_and_determinism(d1):
    pux = np.array([[0.25, 0.25, 0, 0], [0, 0, 0.25, 0.25]])
    a = sim_1dc(d1, pux, 40, 0.05, 0.3, 0.3, 12, seed=9)
    b = sim_1dc(d1, pux, 40, 0.05, 0.3, 0.3, 12, seed=9)
    c = sim_1dc(d1, pux, 40, 0.05, 0.3, 0.3, 12, seed=9, n_jobs=2)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    lines = a.to_csv().splitlines()
    assert lines[0] == "statistic,estimate,ci_low,ci_high,predicted_bound"
    for row in a.rows:
        assert row.ci_low <= row.estimate <= row.ci_high
    err = a["error_rate"]
    assert 0 <= err.ci_low and err.ci_high <= 1


def test_sim_validation(d1):
    pux = [[0.25] * 4]
    with pytest.raises(ValueError):
        sim_1dc(d1, pux, 40, 0, 0.1, 0.3, 0)
    with pytest.raises(ValueError):
        sim_1dc(d1, pux, 40, 0, 0.1, 0.3, 5, method="psychic")
    with pytest.raises(ValueError):
        sim_1dc(d1, [[0.5, 0.5]], 40, 0, 0.1, 0.3, 5)
    with pytest.raises(GuardError):
        sim_1dc(d1, pux, 1000, 0, 0.1, 0.3, 5)
    with pytest.raises(GuardError):
        sim_1dc(d1, pux, 200, 0.5, 0.1, 0.3, 5)


# Marton codebooks

def test_singleton_bins():
    rates = MartonRates(0.0, 0.1, 0.1, 0.05, 0.1, 0.1)
    cb = gen_marton_codebook(dsbs(0.2), 30, rates, 0.5, seed=2)
    assert cb.bins1.shape[1] == 1 and cb.bins2.shape[1] == 1
    assert np.all(cb.s_size <= 1)


def test_copies_of_cloud_make_every_pair_typical():
    # Z1 = Z2 = U, so a pair is typical exactly when the cloud is
    m = np.zeros((2, 2, 2, 2))
    m[0, 0, 0, 0] = m[1, 1, 1, 1] = 0.5
    j = JointPmf(m, ("U", "Z1", "Z2", "X"))
    cb = gen_marton_codebook(j, 20, MartonRates(0.0, 0.05, 0.05, 0.0, 0.15, 0.15), 0.9, seed=0)
    assert cb.typical.all()
    B1, B2 = cb.bins1.shape[1], cb.bins2.shape[1]
    assert np.all(cb.s_size == B1 * B2)


def test_codebook_invariants():
    rates = {"R0": 0.05, "R1": 0.05, "R2": 0.05, "R3": 0.05, "Rt1": 0.15, "Rt2": 0.1}
    cb = gen_marton_codebook(dsbs(0.2, nx=2), 40, rates, 0.4, seed=4)
    L1 = cb.z1.shape[1]
    assert sorted(cb.bins1.ravel().tolist()) == list(range(L1))
    assert cb.bins1.shape[1] == word_count(40, 0.1)
    M0, M1, M2 = cb.s_size.shape
    for m0, m1, m2 in itertools.product(range(M0), range(M1), range(M2)):
        S = cb.s_set(m0, m1, m2)
        assert len(S) == cb.s_size[m0, m1, m2]
        sel = tuple(cb.selected[m0, m1, m2])
        assert sel in S if S else sel == (0, 0)
    assert cb.x.shape == (M0, M1, M2, word_count(40, 0.05), 40)


def test_codebook_reproducible():
    rates = MartonRates(0.05, 0.05, 0.05, 0.05, 0.12, 0.12)
    a = gen_marton_codebook(dsbs(0.3, nx=2), 32, rates, 0.4, seed=11)
    b = gen_marton_codebook(dsbs(0.3, nx=2), 32, rates, 0.4, seed=11)
    c = gen_marton_codebook(dsbs(0.3, nx=2), 32, rates, 0.4, seed=12)
    for f in ("clouds", "z1", "z2", "typical", "selected", "x"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    assert not np.array_equal(a.z1, c.z1)


def test_marton_rate_validation():
    with pytest.raises(ValueError):
        MartonRates(0, 0.2, 0, 0, 0.1, 0)
    with pytest.raises(ValueError):
        MartonRates(-0.1, 0, 0, 0, 0, 0)
    with pytest.raises(GuardError):
        gen_marton_codebook(dsbs(0.2), 100, MartonRates(0, 0, 0, 0, 0.2, 0.2), 0.3)


# pair-set statistics

def test_single_pair_cell():
    rep = sset_stats(dsbs(0.2), 30, 0.0, 0.0, 0.3, 300, seed=0)
    assert rep["collision"].estimate == 0.0
    assert rep["s_size"].estimate <= 1
    p = rep["pair_typical_prob"].estimate
    row = rep["s_empty"]
    se = math.sqrt(p * (1 - p) / 300)
    assert abs(row.estimate - (1 - p)) <= 4 * se + 1e-12


def test_covering_slack_leaves_pair_set_nonempty():
    j = dsbs(0.3)
    I = sset_stats(j, 40, 0.0, 0.0, 0.3, 1)["I(Z1;Z2|U)"].estimate
    r = (I + 0.15) / 2
    rep = sset_stats(j, 40, r, r, 0.3, 200, seed=1)
    assert rep["margin_cover"].estimate > 0
    assert rep["s_empty"].estimate < 0.1


def test_no_collisions_with_rate_slack():
    rep = sset_stats(dsbs(0.1), 200, 0.03, 0.03, 0.3, 200, seed=2)
    assert rep["margin_rows"].estimate >= 0.1 and rep["margin_cols"].estimate >= 0.1
    assert rep["collision"].estimate < 0.05


@pytest.mark.parametrize("flip,n,r,eps", [(0.35, 40, 0.15, 0.5), (0.3, 40, 0.2, 0.4),
                                          (0.4, 30, 0.25, 0.6), (0.25, 50, 0.12, 0.3)])
def test_collision_rate_within_bound(flip, n, r, eps):
    trials = 200
    rep = sset_stats(dsbs(flip), n, r, r, eps, trials, seed=3)
    row = rep["collision"]
    se = math.sqrt(max(row.estimate * (1 - row.estimate), 1e-12) / trials)
    assert row.estimate <= row.predicted_bound + 3 * se


def test_sset_reproducible_and_parallel_safe():
    a = sset_stats(dsbs(0.3), 40, 0.1, 0.1, 0.4, 30, seed=6)
    b = sset_stats(dsbs(0.3), 40, 0.1, 0.1, 0.4, 30, seed=6, n_jobs=2)
    assert a.to_csv() == b.to_csv()
    with pytest.raises(ValueError):
        sset_stats(dsbs(0.3), 40, 0.1, 0.1, 0.4, 0)
