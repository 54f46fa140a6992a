import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from deptest import permtests as P
from deptest.errors import InsufficientSampleError, InvalidInputError
from deptest.sample import pseudo_from_ranks


def perm_pairs(lo, hi):
    return st.integers(lo, hi).flatmap(
        lambda n: st.tuples(st.permutations(range(1, n + 1)), st.permutations(range(1, n + 1)))
    )


@settings(max_examples=40, deadline=None)
@given(perm_pairs(3, 16))
def test_hhg_matches_loops(pair):
    ru, rv = pair
    got = P.hhg_statistics(pseudo_from_ranks(ru, rv)).as_array()
    want = np.array(O.hhg_loops(ru, rv))
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_hhg_needs_three_points():
    with pytest.raises(InsufficientSampleError):
        P.hhg_statistics(pseudo_from_ranks([1, 2], [2, 1]))


def test_pairing():
    ps = pseudo_from_ranks([2, 3, 1], [1, 3, 2])
    assert P.pairing(ps).tolist() == [1, 0, 2]


def test_legendre_orthonormal_on_midpoint_grid():
    n = 2000
    x = (np.arange(n) + 0.5) / n
    leg = P.legendre_orthonormal(x, 5)
    gram = leg.T @ leg / n
    assert np.allclose(gram, np.eye(5), atol=1e-5)
    assert np.allclose(leg[:, 0], math.sqrt(3) * (2 * x - 1))


def test_ddr_dimension():
    assert P.ddr_dimension(50) == 8
    assert P.ddr_dimension(100) == 10
    assert P.ddr_dimension(400) == 10
    assert P.ddr_dimension(16) == 4


def test_select_s2_picks_first_maximizer():
    n = math.e  # log n = 1
    assert P.select_s2(np.array([0.5, 3.0, 4.0]), n) == 2
    assert P.select_s2(np.array([5.0, 6.0, 7.0]), n) == 1


def test_select_lambda_always_keeps_first_term():
    c = np.array([[0.0, 10.0], [0.5, 0.1]])
    t, size = P.select_lambda(c, math.e)
    assert (t, size) == (10.0, 2)
    t, size = P.select_lambda(np.zeros((2, 2)), math.e)
    assert (t, size) == (0.0, 1)


def test_ddr_batch_agrees_with_scalar_rules():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(10, 80))
        ps = pseudo_from_ranks(rng.permutation(n) + 1, rng.permutation(n) + 1)
        d = P.ddr_dimension(n)
        comp = P._ddr_components(P.pairing(ps), np.empty((0, n), dtype=np.int64), d)[0]
        cum = np.cumsum(np.diagonal(comp))
        t_v, _ = P.select_lambda(comp, n)
        got = P.ddr_statistics(ps)
        assert got.t_s2 == pytest.approx(cum[P.select_s2(cum, n) - 1], rel=1e-12)
        assert got.t_v == pytest.approx(t_v, rel=1e-12)


def test_ddr_t_first_component_is_scaled_spearman():
    # first Legendre polynomial is linear, so T_1 is a scaled squared rank correlation
    rng = np.random.default_rng(3)
    n = 40
    ru, rv = rng.permutation(n) + 1, rng.permutation(n) + 1
    ps = pseudo_from_ranks(ru, rv)
    gu = (ru - 0.5) / n
    gv = (rv - 0.5) / n
    c = np.sum(math.sqrt(3) * (2 * gu - 1) * math.sqrt(3) * (2 * gv - 1)) / math.sqrt(n)
    assert P.ddr_t(ps, 1)[0] == pytest.approx(c * c, rel=1e-12)


def test_pvalues_range_and_grid():
    rng = np.random.default_rng(1)
    ps = pseudo_from_ranks(rng.permutation(30) + 1, rng.permutation(30) + 1)
    pv = P.all_pvalues(ps)
    assert list(pv) == ["hhg_chi2_sum", "hhg_lik_sum", "hhg_chi2_max", "hhg_lik_max", "ddr_v", "ddr_s2"]
    for v in pv.values():
        assert 1 / 101 <= v <= 1.0
        assert abs(v * 101 - round(v * 101)) < 1e-9


def test_comonotone_gets_smallest_pvalue():
    n = 40
    ps = pseudo_from_ranks(range(1, n + 1), range(1, n + 1))
    pv = P.all_pvalues(ps)
    for k, v in pv.items():
        if k != "hhg_chi2_max":
            assert v == 1 / 101, k
    # the max chi-square is capped at n - 2 (a perfectly separated 2x2 table), and a
    # 1-vs-rest table in almost any permuted sample hits the same cap, so ties count
    assert P.hhg_statistics(ps).chi2_max == n - 2
    perm = P.permutation_matrix(P.DEFAULT_PERM, n)
    ties = sum(
        P.hhg_statistics(pseudo_from_ranks(range(1, n + 1), row + 1)).chi2_max >= n - 2 for row in perm
    )
    assert pv["hhg_chi2_max"] == (1 + ties) / 101


def test_pvalues_deterministic_and_seed_sensitive():
    rng = np.random.default_rng(2)
    ps = pseudo_from_ranks(rng.permutation(30) + 1, rng.permutation(30) + 1)
    assert P.all_pvalues(ps) == P.all_pvalues(ps)
    base = P.permutation_matrix(P.DEFAULT_PERM, 30)
    assert base.shape == (100, 30)
    assert not np.array_equal(base, P.permutation_matrix(P.PermConfig(rng_seed=5), 30))


def test_perm_pvalue_single_and_errors():
    ps = pseudo_from_ranks(range(1, 11), range(1, 11))
    assert P.perm_pvalue(ps, "ddr_s2") == P.all_pvalues(ps)["ddr_s2"]
    with pytest.raises(InvalidInputError):
        P.perm_pvalue(ps, "nope")
    with pytest.raises(InsufficientSampleError):
        P.all_pvalues(pseudo_from_ranks([1, 2, 3, 4], [4, 3, 2, 1]))
    with pytest.raises(ValueError):
        P.PermConfig(n_permutations=0)


@settings(max_examples=20, deadline=None)
@given(perm_pairs(5, 30), st.randoms(use_true_random=False))
def test_statistics_ignore_row_order(pair, rnd):
    ru, rv = pair
    idx = list(range(len(ru)))
    rnd.shuffle(idx)
    a = pseudo_from_ranks(ru, rv)
    b = pseudo_from_ranks([ru[i] for i in idx], [rv[i] for i in idx])
    assert P.all_pvalues(a) == P.all_pvalues(b)
    assert np.array_equal(P.hhg_statistics(a).as_array(), P.hhg_statistics(b).as_array())
