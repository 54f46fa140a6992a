import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from deptest import indicators as I
from deptest.errors import InsufficientSampleError
from deptest.sample import pseudo_from_ranks


def perm_pairs(lo, hi):
    return st.integers(lo, hi).flatmap(
        lambda n: st.tuples(st.permutations(range(1, n + 1)), st.permutations(range(1, n + 1)))
    )


def comonotone(n):
    return pseudo_from_ranks(range(1, n + 1), range(1, n + 1))


def countermonotone(n):
    return pseudo_from_ranks(range(1, n + 1), range(n, 0, -1))


def random_ps(n, seed):
    rng = np.random.default_rng(seed)
    return pseudo_from_ranks(rng.permutation(n) + 1, rng.permutation(n) + 1)


# --- hand values ------------------------------------------------------------------------


def test_hand_values():
    assert I.spearman(pseudo_from_ranks([1, 2, 3, 4], [2, 1, 4, 3])) == 0.6
    assert I.kendall(pseudo_from_ranks([1, 2, 3], [1, 3, 2])) == 1 / 3
    assert I.hoeffding_d(comonotone(5)) == 1.0
    assert I.auk(comonotone(5)) == 1.0


def test_blomqvist_median_points_contribute_zero():
    # n = 3: the middle point sits on both medians
    assert I.blomqvist(comonotone(3)) == 2 / 3
    assert I.blomqvist(comonotone(4)) == 1.0
    assert I.blomqvist(countermonotone(4)) == -1.0


@pytest.mark.parametrize("n", [10, 31, 64])
def test_extremes(n):
    co, cm = comonotone(n), countermonotone(n)
    assert I.spearman(co) == 1.0 and I.spearman(cm) == -1.0
    assert I.kendall(co) == 1.0 and I.kendall(cm) == -1.0
    assert I.hoeffding_d(co) == 1.0
    assert I.copula_dcor(co) == pytest.approx(1.0)
    # rank-equispaced bins are uneven for some n and the smoother clips at the ends
    assert I.mic(co) > 0.999
    assert I.ace_maxcor(co) > 0.999


def test_rdc_comonotone_and_deterministic():
    co = comonotone(60)
    assert I.rdc(co) == pytest.approx(1.0, abs=1e-6)
    ps = random_ps(60, 1)
    assert I.rdc(ps) == I.rdc(ps)


def test_mutual_information_orders_dependence():
    co = comonotone(80)
    ind = random_ps(80, 3)
    assert I.linfoot_mi(co) > 0.9
    assert I.linfoot_mi(ind) < I.linfoot_mi(co)
    assert I.linfoot(0.0) == 0.0
    assert I.linfoot(-0.3) == 0.0


def test_hellinger_clamp():
    ps = random_ps(40, 5)
    b = I.hellinger_b(ps)
    assert I.hellinger(ps) == 1.0 - min(max(b, 0.0), 1.0)
    assert I.hellinger(comonotone(40)) > 0.5


def test_mic_grids_budget():
    assert I.mic_grids(10, 4) == [(2, 2)]
    assert all(a * b <= max(4, math.ceil(100**0.6)) for a, b in I.mic_grids(100, 4))


def test_all_measures_order_and_length():
    ps = random_ps(50, 7)
    vals = I.all_measures(ps)
    assert len(vals) == len(I.MEASURES) == 13
    assert vals[0] == I.spearman(ps)
    assert vals[12] == I.copula_hsic(ps)


@pytest.mark.parametrize("fn, n", [(I.hoeffding_d, 4), (I.ace_maxcor, 9), (I.mic, 3)])
def test_small_samples_rejected(fn, n):
    with pytest.raises(InsufficientSampleError):
        fn(comonotone(n))


def test_rdc_needs_more_points_than_features():
    with pytest.raises(InsufficientSampleError):
        I.rdc(comonotone(20))


# --- oracles (routes independent of the library code) ------------------------------


@settings(max_examples=40, deadline=None)
@given(perm_pairs(5, 12))
def test_rank_exact_measures_match_oracles(pair):
    ru, rv = pair
    ps = pseudo_from_ranks(ru, rv)
    assert I.hoeffding_d(ps) == O.hoeffding_ustat(np.array(ru), np.array(rv))
    assert I.auk(ps) == O.auk_loops(ru, rv)
    assert I.kendall(ps) == pytest.approx(O.kendall_loops(ru, rv), abs=1e-15)
    assert I.spearman(ps) == pytest.approx(O.spearman_pearson(ru, rv), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(perm_pairs(5, 25))
def test_real_valued_measures_match_oracles(pair):
    ru, rv = pair
    ps = pseudo_from_ranks(ru, rv)
    assert I.hellinger_b(ps) == pytest.approx(O.hellinger_b_loops(ru, rv), abs=1e-12)
    assert I.copula_dcor(ps) == pytest.approx(O.dcor_uncentred(ps.u, ps.v), abs=1e-12)
    assert I.copula_mdc(ps) == pytest.approx(O.mdc_loops(ps.u, ps.v), abs=1e-12)
    assert I.copula_hsic(ps) == pytest.approx(O.hsic_matrix(list(ps.u), list(ps.v)), abs=1e-12)


# --- invariants --------------------------------------------------------------------------


BOUNDED01 = ("auk", "hellinger", "linfoot_mi", "mic", "ace", "rdc", "dcor", "mdc", "hsic")
SYMMETRIC = ("spearman", "kendall", "blomqvist", "auk", "hoeffding", "hellinger", "linfoot_mi", "mic", "dcor", "mdc", "hsic")


@settings(max_examples=30, deadline=None)
@given(perm_pairs(25, 60))
def test_ranges(pair):
    vals = dict(zip((k for k, _ in I.MEASURES), I.all_measures(pseudo_from_ranks(*pair))))
    for k in ("spearman", "kendall", "blomqvist"):
        assert -1.0 <= vals[k] <= 1.0
    assert -0.5 <= vals["hoeffding"] <= 1.0
    for k in BOUNDED01:
        assert 0.0 <= vals[k] <= 1.0, k


@settings(max_examples=30, deadline=None)
@given(perm_pairs(25, 60))
def test_symmetric_measures(pair):
    ps = pseudo_from_ranks(*pair)
    a = dict(zip((k for k, _ in I.MEASURES), I.all_measures(ps)))
    b = dict(zip((k for k, _ in I.MEASURES), I.all_measures(ps.swapped())))
    for k in SYMMETRIC:
        assert a[k] == pytest.approx(b[k], abs=1e-12), k


@settings(max_examples=30, deadline=None)
@given(perm_pairs(5, 40))
def test_concordance_flips_sign_under_reflection(pair):
    ru, rv = pair
    n = len(ru)
    ps = pseudo_from_ranks(ru, rv)
    flipped = pseudo_from_ranks(ru, [n + 1 - r for r in rv])
    assert I.spearman(flipped) == pytest.approx(-I.spearman(ps), abs=1e-12)
    assert I.kendall(flipped) == -I.kendall(ps)
    assert I.blomqvist(flipped) == -I.blomqvist(ps)


@settings(max_examples=30, deadline=None)
@given(perm_pairs(25, 50), st.randoms(use_true_random=False))
def test_row_order_does_not_matter(pair, rnd):
    ru, rv = pair
    idx = list(range(len(ru)))
    rnd.shuffle(idx)
    a = I.all_measures(pseudo_from_ranks(ru, rv))
    b = I.all_measures(pseudo_from_ranks([ru[i] for i in idx], [rv[i] for i in idx]))
    # the RDC singular values pick up ~1e-11 of reordering noise
    assert np.allclose(a, b, rtol=0, atol=1e-9)


def test_blomqvist_null_law_is_hypergeometric():
    # full enumeration at n = 8: the lower-left count X is Hypergeometric(8, 4, 4) and
    # the statistic is (4X - n)/n, so its null law has only n/2 + 1 atoms
    from collections import Counter
    from fractions import Fraction
    from itertools import permutations

    from scipy.special import comb

    n = 8
    counts = Counter(I.blomqvist(pseudo_from_ranks(range(1, n + 1), p)) for p in permutations(range(1, n + 1)))
    total = math.factorial(n)
    for x in range(n // 2 + 1):
        want = Fraction(int(comb(4, x, exact=True) * comb(4, 4 - x, exact=True)), int(comb(8, 4, exact=True)))
        assert Fraction(counts[(4 * x - n) / n], total) == want
    assert len(counts) == n // 2 + 1
