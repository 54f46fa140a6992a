import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deptest import features as F
from deptest.errors import InsufficientSampleError, SchemaError
from deptest.sample import BivariateSample, pseudo_from_ranks


def perm_pairs(lo, hi):
    return st.integers(lo, hi).flatmap(
        lambda n: st.tuples(st.permutations(range(1, n + 1)), st.permutations(range(1, n + 1)))
    )


def comonotone(n):
    return pseudo_from_ranks(range(1, n + 1), range(1, n + 1))


@settings(max_examples=60, deadline=None)
@given(perm_pairs(2, 200))
def test_grid_counts_every_point_once(pair):
    g = F.image_grid(pseudo_from_ranks(*pair))
    assert g.raw_counts.sum() == len(pair[0])
    assert g.bins.max() == 1.0 and g.bins.min() >= 0.0


@settings(max_examples=60, deadline=None)
@given(perm_pairs(2, 120))
def test_bin_index_matches_float_floor(pair):
    ru = np.array(pair[0])
    n = ru.size
    want = np.minimum(np.floor(ru / (n + 1) * 25), 24).astype(int)
    # exact integer route agrees with the float formula away from bin edges
    edge = np.isclose(ru / (n + 1) * 25, np.round(ru / (n + 1) * 25))
    got = F.bin_index(ru, n)
    assert np.array_equal(got[~edge], want[~edge])
    assert np.all((got >= 0) & (got < 25))


def test_shared_cells():
    # out of n = 100, ranks 1..4 fall below 1/25 (4 * 25 < 101 <= 5 * 25)
    g = F.image_grid(comonotone(100))
    assert g.raw_counts[0, 0] == 4
    assert g.raw_counts.diagonal().sum() == 100
    assert g.bins[0, 0] == g.raw_counts[0, 0] / g.raw_counts.max()


def test_comonotone_image_is_diagonal():
    g = F.image_grid(comonotone(24))
    # with n + 1 = 25, rank r lands in bin r, so bin 0 stays empty
    assert np.array_equal(g.raw_counts[1:, 1:], np.eye(24, dtype=np.int64))
    assert g.raw_counts[0].sum() == 0 and g.raw_counts[:, 0].sum() == 0


def test_flat_is_column_major():
    g = F.image_grid(pseudo_from_ranks([1, 2, 3], [3, 1, 2]))
    flat = g.flat()
    a, b = np.nonzero(g.bins)
    for i, j in zip(a, b):
        assert flat[j * 25 + i] == g.bins[i, j]


@settings(max_examples=40, deadline=None)
@given(perm_pairs(2, 80))
def test_swapping_margins_transposes_image(pair):
    ps = pseudo_from_ranks(*pair)
    assert np.array_equal(F.image_grid(ps.swapped()).bins, F.image_grid(ps).bins.T)


def test_indicator_vector_comonotone():
    iv = F.indicator_vector(comonotone(50))
    assert iv.values.shape == (20,)
    assert iv["spearman"] == 1.0 and iv["kendall"] == 1.0 and iv["blomqvist"] == 1.0
    assert iv["n"] == 50.0
    assert iv.values[19] == 50.0
    assert not iv.values.flags.writeable


def test_indicator_vector_pvalue_entries_on_grid():
    rng = np.random.default_rng(4)
    ps = pseudo_from_ranks(rng.permutation(40) + 1, rng.permutation(40) + 1)
    iv = F.indicator_vector(ps)
    for v in iv.values[13:19]:
        assert 0.0 <= v <= 100 / 101
        assert abs((1 - v) * 101 - round((1 - v) * 101)) < 1e-9


def test_indicator_vector_needs_five_points():
    with pytest.raises(InsufficientSampleError):
        F.indicator_vector(comonotone(4))


def test_ordering_hash_is_stable():
    assert F.indicator_ordering_hash() == F.indicator_ordering_hash()
    assert len(F.indicator_ordering_hash()) == 16
    assert F.INDICATOR_NAMES[-1] == "n" and len(F.INDICATOR_NAMES) == 20


def small_set():
    rng = np.random.default_rng(9)
    samples = [BivariateSample(rng.normal(size=25), rng.normal(size=25)) for _ in range(3)]
    return F.featurize(samples, [0, 1, 0])


def test_featurize_thread_independent():
    rng = np.random.default_rng(1)
    samples = [BivariateSample(rng.normal(size=30), rng.normal(size=30)) for _ in range(6)]
    assert F.featurize(samples, threads=1) == F.featurize(samples, threads=3)


def test_json_roundtrip(tmp_path):
    fs = small_set()
    p = tmp_path / "f.json"
    F.write_feature_set(fs, p)
    back = F.read_feature_set(p)
    assert back == fs
    assert np.array_equal(back.hellinger_b, fs.hellinger_b)
    assert back.n.tolist() == [25, 25, 25]
    assert back.subset([2]).labels.tolist() == [0]


def test_json_errors_name_the_field():
    doc = json.loads(F.feature_set_to_json(small_set()))
    del doc["records"][1]["indicators"]
    with pytest.raises(SchemaError, match=r"records\[1\]: missing field 'indicators'"):
        F.feature_set_from_json(json.dumps(doc))
    doc = json.loads(F.feature_set_to_json(small_set()))
    doc["indicator_hash"] = "0" * 16
    with pytest.raises(SchemaError, match="indicator_hash"):
        F.feature_set_from_json(json.dumps(doc))
    doc = json.loads(F.feature_set_to_json(small_set()))
    doc["records"][0]["n"] = 99
    with pytest.raises(SchemaError, match="field 'n'"):
        F.feature_set_from_json(json.dumps(doc))
    with pytest.raises(SchemaError, match="not valid JSON"):
        F.feature_set_from_json("{")


def test_config_roundtrip():
    cfg = F.FeatureConfig()
    assert F.FeatureConfig.from_dict(cfg.to_dict()) == cfg
