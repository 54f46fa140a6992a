import csv
import json

import numpy as np
import pytest

from conftest import FIXTURES
from deptest import bench as B
from deptest.calibrate import calibrate
from deptest.dgp import TRAINING_MODELS, GenSpec, ModelId
from deptest.errors import CalibrationMissingError, InvalidInputError
from deptest.nn.model import build_architecture


def test_gap_metrics_examples():
    g = B.gap_metrics([[1.0, 0.4]])
    assert g["avg_gap"].tolist() == [0.0, pytest.approx(0.6)]
    g = B.gap_metrics([[0.9, 0.5, 0.7], [0.2, 0.6, 0.6]])
    assert np.allclose(g["avg_gap"], [0.2, 0.2, 0.1])
    assert np.allclose(g["max_gap"], [0.4, 0.4, 0.2])
    with pytest.raises(InvalidInputError):
        B.gap_metrics([])


def test_best_method_everywhere_has_zero_gap():
    rng = np.random.default_rng(0)
    p = rng.random((20, 6))
    p[:, 3] = 1.0
    g = B.gap_metrics(p)
    assert g["avg_gap"][3] == 0.0 and g["max_gap"][3] == 0.0
    assert np.all(g["avg_gap"] >= 0) and np.all(g["max_gap"] >= g["avg_gap"])


def test_fixture_summary_rows_recompute():
    with open(FIXTURES / "exp1_power_table.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    methods = [k for k in rows[0] if k not in ("row", "n")]
    summary = ("Average Power", "Average Gap", "Max Gap")
    for n in sorted({r["n"] for r in rows}, key=int):
        body = [r for r in rows if r["n"] == n and r["row"] not in summary]
        assert len(body) == len(TRAINING_MODELS)
        p = np.array([[float(r[m]) for m in methods] for r in body])
        g = B.gap_metrics(p)
        ref = {r["row"]: np.array([float(r[m]) for m in methods]) for r in rows if r["n"] == n and r["row"] in summary}
        # the transcribed powers carry three decimals, so summaries agree to rounding
        assert np.all(np.abs(p.mean(axis=0) - ref["Average Power"]) <= 0.001)
        assert np.all(np.abs(g["avg_gap"] - ref["Average Gap"]) <= 0.001)
        assert np.all(np.abs(g["max_gap"] - ref["Max Gap"]) <= 0.001)


def test_replicate_specs():
    t = GenSpec("sine", 30, "test", noise_class="L1")
    a = B.spec_replicates(t, 5, 1)
    assert len({s.seed for s in a}) == 5 and all(s.model is ModelId.SINE for s in a)
    assert a == B.spec_replicates(t, 5, 1)
    with pytest.raises(InvalidInputError):
        B.spec_replicates(t, 0, 1)
    mixed = B.mixed_noise_specs(ModelId.LINEAR, 30, 10, 2)
    assert [s.noise_class for s in mixed].count("L1") == 6


def test_experiment_rows():
    assert len(B.experiment_rows("exp1", 30, 5, 0)) == 20
    rows = B.experiment_rows("exp2", 30, 3, 0)
    assert len(rows) == 12 and all(len(s) == 3 for _, s in rows)
    assert rows[0][0].endswith("-A")
    with pytest.raises(InvalidInputError):
        B.experiment_rows("exp3", 30, 5, 0)


@pytest.fixture(scope="module")
def table30():
    return calibrate(["kendall", "spearman"], [30], [0.05], n_prime=500, seed=11)


def test_noiseless_monotone_model_has_full_kendall_power(table30):
    t = GenSpec("linear", 30, "test", noise_class="L1", sigma=0.0)
    assert B.estimate_power("kendall", t, 20, 0.05, table30, seed=3) == 1.0


def test_independent_rejection_rate_near_alpha(table30):
    t = GenSpec(ModelId.INDEPENDENT, 30)
    rate = B.estimate_power("spearman", t, 400, 0.05, table30, seed=4)
    # binomial sd at 400 reps is about 0.011, plus calibration noise from N' = 500
    assert 0.01 <= rate <= 0.10


def test_rejections_checks(table30):
    specs = B.spec_replicates(GenSpec(ModelId.INDEPENDENT, 30), 3, 0)
    with pytest.raises(CalibrationMissingError):
        B.rejections(["dcor"], specs, 0.05, table30)
    with pytest.raises(InvalidInputError):
        B.rejections(["kendall"], [], 0.05, table30)
    mixed = specs + B.spec_replicates(GenSpec(ModelId.INDEPENDENT, 40), 1, 0)
    with pytest.raises(InvalidInputError):
        B.rejections(["kendall"], mixed, 0.05, table30)


def test_run_experiment_is_thread_independent(tmp_path):
    kw = dict(sizes=[25], reps=2, alpha=0.05, seed=5, n_prime=60, methods=["kendall", "dcor"])
    a = B.run_experiment("exp2", threads=1, **kw)
    b = B.run_experiment("exp2", threads=3, **kw)
    assert a.to_csv() == b.to_csv()
    assert len(a.rows) == 12
    paths = a.write(tmp_path / "out")
    assert [p.name for p in paths] == ["power.csv", "power_summary.json", "power_plot.csv"]
    doc = json.loads(paths[1].read_text())
    assert doc["methods"] == ["kendall", "dcor"] and set(doc["summary"]) == {"25"}
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "model,n,method,power" and len(lines) == 1 + 12 * 2


def test_run_experiment_argument_errors():
    with pytest.raises(InvalidInputError):
        B.run_experiment("exp1", [25], 0, 0.05, 0, n_prime=10)
    with pytest.raises(InvalidInputError):
        B.run_experiment("exp1", [25], 1, 0.05, 0, methods=["all-mlp"], n_prime=10)
    with pytest.raises(CalibrationMissingError):
        B.run_experiment("exp1", [25], 1, 0.05, 0, methods=["kendall"])


def test_default_methods_include_given_models():
    model = build_architecture("all-mlp", seed=0)
    t = B.run_experiment("exp2", [25], 1, 0.05, 0, models={"all-mlp": model}, n_prime=30)
    assert t.methods[0] == "all-mlp" and len(t.methods) == 20
