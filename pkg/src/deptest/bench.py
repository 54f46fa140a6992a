"""Monte-Carlo power of the deep tests and the single-indicator tests.

Every procedure is applied to the same generated samples (paired design),
so power differences between methods are not inflated by sampling noise.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .calibrate import TEST_INDICATORS, CalibrationTable, calibrate, statistic_values
from .dgp.corpus import noise_class_counts
from .dgp.models import EXTRA_MODELS, IMAGE_MODELS, TRAINING_MODELS, VARIANTS, GenSpec, ModelId, gen_model
from .errors import CalibrationMissingError, InvalidInputError
from .features import DEFAULT_FEATURES, FeatureConfig, featurize
from .nn.model import Architecture, NetworkModel, model_hash
from .seeding import derive_seed

DEEP_METHODS: tuple[str, ...] = tuple(a.value for a in Architecture)
ALL_METHODS: tuple[str, ...] = DEEP_METHODS + TEST_INDICATORS
DESK_SIZES = (50, 100)
FULL_SIZES = (30, 50, 100, 200, 300, 400)


def gap_metrics(powers) -> dict[str, np.ndarray]:
    """Average and maximum power gap to the best method, per method.

    ``powers`` is a (models x methods) matrix. The gap of a method on a
    model is the best power on that model minus its own power.
    """
    p = np.asarray(powers, dtype=np.float64)
    if p.ndim != 2 or p.size == 0:
        raise InvalidInputError("powers must be a nonempty models x methods matrix")
    gaps = p.max(axis=1, keepdims=True) - p
    return {"avg_gap": gaps.mean(axis=0), "max_gap": gaps.max(axis=0)}


def spec_replicates(template: GenSpec, reps: int, seed: int) -> list[GenSpec]:
    """``reps`` seeded copies of ``template``.

    For training-model templates without a fixed noise class the classes
    follow the 3:1:1 split of :func:`~deptest.dgp.corpus.noise_class_counts`.
    """
    if reps < 1:
        raise InvalidInputError(f"reps must be >= 1, got {reps}")
    m = template.model
    tag = template.noise_class or template.variant or "-"
    out = []
    for r in range(reps):
        s = derive_seed(seed, f"power/{m.value}/{template.n}/{tag}/{r}")
        out.append(replace(template, seed=s))
    return out


def mixed_noise_specs(model: ModelId, n: int, reps: int, seed: int, role: str = "test") -> list[GenSpec]:
    """Replicates of a training model spread over noise classes L1/L2/L3 in a 3:1:1 ratio."""
    out = []
    idx = 0
    for cls, cnt in zip(("L1", "L2", "L3"), noise_class_counts(reps)):
        for _ in range(cnt):
            s = derive_seed(seed, f"power/{model.value}/{n}/{idx}")
            out.append(GenSpec(model, n, role, noise_class=cls, seed=s))
            idx += 1
    return out


def rejections(
    methods: Sequence[str],
    specs: Sequence[GenSpec],
    alpha: float,
    table: CalibrationTable,
    models: Mapping[str, NetworkModel] | None = None,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    threads: int = 1,
) -> np.ndarray:
    """Boolean (reps x methods) matrix of rejections on the generated samples."""
    if not specs:
        raise InvalidInputError("no samples to test")
    ns = {sp.n for sp in specs}
    if len(ns) != 1:
        raise InvalidInputError("all replicates must share one sample size")
    n = ns.pop()
    fs = featurize([gen_model(sp) for sp in specs], cfg=cfg, threads=threads)
    models = models or {}
    out = np.empty((len(specs), len(methods)), dtype=bool)
    for j, meth in enumerate(methods):
        entry = table.get(meth, n, alpha)
        model = models.get(meth)
        if model is not None and entry.model_hash not in (None, model_hash(model)):
            raise CalibrationMissingError(f"calibration for {meth!r} at n={n} was made for a different model")
        values = statistic_values(meth, fs, model)
        out[:, j] = values > entry.d_alpha
    return out


def estimate_power(
    procedure: str,
    template: GenSpec,
    reps: int,
    alpha: float,
    table: CalibrationTable,
    seed: int,
    model: NetworkModel | None = None,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    threads: int = 1,
) -> float:
    """Fraction of ``reps`` seeded samples from ``template`` on which ``procedure`` rejects."""
    specs = spec_replicates(template, reps, seed)
    models = {procedure: model} if model is not None else None
    return float(rejections([procedure], specs, alpha, table, models, cfg, threads)[:, 0].mean())


@dataclass
class PowerTable:
    """Powers per (row label, n) and method, with per-n summary rows."""

    methods: list[str]
    rows: list[tuple[str, int]] = field(default_factory=list)
    powers: list[np.ndarray] = field(default_factory=list)
    reps: int = 0
    alpha: float = 0.05
    seed: int = 0

    def matrix(self, n: int) -> np.ndarray:
        return np.array([p for (lab, m), p in zip(self.rows, self.powers) if m == n])

    def sizes(self) -> list[int]:
        return sorted({m for _, m in self.rows})

    def summary(self) -> dict[int, dict[str, list[float]]]:
        out = {}
        for n in self.sizes():
            mat = self.matrix(n)
            gm = gap_metrics(mat)
            out[n] = {
                "average_power": mat.mean(axis=0).tolist(),
                "average_gap": gm["avg_gap"].tolist(),
                "max_gap": gm["max_gap"].tolist(),
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "n", "method", "power"])
        for (lab, n), p in zip(self.rows, self.powers):
            for meth, v in zip(self.methods, p):
                w.writerow([lab, n, meth, repr(float(v))])
        return buf.getvalue()

    def plot_csv(self) -> str:
        """Average power per size, one column per method (x = n)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n"] + self.methods)
        for n, s in self.summary().items():
            w.writerow([n] + [repr(v) for v in s["average_power"]])
        return buf.getvalue()

    def summary_json(self) -> str:
        doc = {
            "methods": self.methods,
            "reps": self.reps,
            "alpha": self.alpha,
            "seed": self.seed,
            "summary": {str(n): s for n, s in self.summary().items()},
        }
        return json.dumps(doc, indent=1) + "\n"

    def write(self, outdir) -> list[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = [outdir / "power.csv", outdir / "power_summary.json", outdir / "power_plot.csv"]
        paths[0].write_text(self.to_csv(), encoding="utf-8")
        paths[1].write_text(self.summary_json(), encoding="utf-8")
        paths[2].write_text(self.plot_csv(), encoding="utf-8")
        return paths


def experiment_rows(which: str, n: int, reps: int, seed: int) -> list[tuple[str, list[GenSpec]]]:
    """Row labels with their replicate specs for one sample size."""
    if which == "exp1":
        return [(m.value, mixed_noise_specs(m, n, reps, seed)) for m in TRAINING_MODELS]
    if which == "exp2":
        rows = []
        for m in EXTRA_MODELS + IMAGE_MODELS:
            for v in VARIANTS:
                template = GenSpec(m, n, "test", variant=v, seed=0)
                rows.append((f"{m.value}-{v}", spec_replicates(template, reps, seed)))
        return rows
    raise InvalidInputError(f"experiment must be 'exp1' or 'exp2', got {which!r}")


def run_experiment(
    which: str,
    sizes: Sequence[int],
    reps: int,
    alpha: float,
    seed: int,
    models: Mapping[str, NetworkModel] | None = None,
    table: CalibrationTable | None = None,
    n_prime: int | None = None,
    methods: Sequence[str] | None = None,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    threads: int = 1,
) -> PowerTable:
    """Power of every method on every row of experiment ``which`` ("exp1" or "exp2").

    Methods default to the 19 indicators plus one deep test per model given.
    Missing calibration entries are computed on the fly when ``n_prime`` is set.
    """
    if reps < 1:
        raise InvalidInputError(f"reps must be >= 1, got {reps}")
    models = dict(models or {})
    if methods is None:
        methods = [m for m in DEEP_METHODS if m in models] + list(TEST_INDICATORS)
    methods = list(methods)
    for meth in methods:
        if meth not in TEST_INDICATORS and meth not in models:
            raise InvalidInputError(f"method {meth!r} needs a trained model")
    table = table if table is not None else CalibrationTable()
    out = PowerTable(methods, reps=reps, alpha=alpha, seed=seed)
    for n in sizes:
        _ensure_calibrated(table, methods, n, alpha, n_prime, seed, models, cfg, threads)
        for label, specs in experiment_rows(which, n, reps, seed):
            rej = rejections(methods, specs, alpha, table, models, cfg, threads)
            out.rows.append((label, n))
            out.powers.append(rej.mean(axis=0))
    return out


def _ensure_calibrated(table, methods, n, alpha, n_prime, seed, models, cfg, threads) -> None:
    missing = [m for m in methods if (m, n, float(alpha)) not in table.entries]
    if not missing:
        return
    if n_prime is None:
        table.get(missing[0], n, alpha)  # raises CalibrationMissingError
    cal_seed = derive_seed(seed, "calibration")
    table.merge(calibrate(missing, [n], [alpha], n_prime, cal_seed, models, cfg, threads))
