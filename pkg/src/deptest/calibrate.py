"""Monte-Carlo null calibration and the resulting tests.

A statistic is calibrated at sample size ``n`` by evaluating it on ``N'``
seeded samples of independent uniforms; its critical value ``d_alpha`` is
the smallest observed null value ``d`` with ``#{scores > d} / N' <= alpha``.
A test rejects independence when the observed statistic exceeds ``d_alpha``.

Indicator statistics
--------------------
``spearman``, ``kendall`` and ``blomqvist`` are used in absolute value, so
their tests are two-sided. ``hellinger`` is calibrated on ``1 - B`` without
the clamp applied to the feature: under independence the clamped feature is
zero most of the time, and a statistic with such an atom at its critical
value cannot reach the nominal level. All other indicators (including the
one-minus-p-value features) use their right tail as is.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .dgp import gen_independent
from .errors import CalibrationMissingError, InvalidInputError, SchemaError
from .features import DEFAULT_FEATURES, INDICATOR_NAMES, FeatureConfig, FeatureSet, featurize, features_of
from .nn.model import NetworkModel, model_hash, predict
from .sample import BivariateSample
from .seeding import derive_seed

TEST_INDICATORS: tuple[str, ...] = INDICATOR_NAMES[:19]
TWO_SIDED = frozenset({"spearman", "kendall", "blomqvist"})
CALIBRATION_SCHEMA = "deptest.calibration/1"


def indicator_statistics(fs: FeatureSet, name: str) -> np.ndarray:
    """Test statistic of indicator ``name`` for every row of ``fs``."""
    if name not in TEST_INDICATORS:
        raise InvalidInputError(f"unknown indicator {name!r}; expected one of {', '.join(TEST_INDICATORS)}")
    if name == "hellinger":
        if fs.hellinger_b is None:
            raise InvalidInputError("feature set lacks the unclamped Hellinger estimate")
        return 1.0 - fs.hellinger_b
    col = fs.indicators[:, INDICATOR_NAMES.index(name)]
    return np.abs(col) if name in TWO_SIDED else col.copy()


def null_samples(n: int, n_prime: int, seed: int) -> list[BivariateSample]:
    """The ``N'`` calibration samples of size ``n``; sample ``i`` uses path ``null/{n}/{i}``."""
    if n_prime < 1:
        raise InvalidInputError(f"n_prime must be >= 1, got {n_prime}")
    return [gen_independent(n, derive_seed(seed, f"null/{n}/{i}")) for i in range(n_prime)]


def null_features(
    n: int, n_prime: int, seed: int, cfg: FeatureConfig = DEFAULT_FEATURES, threads: int = 1
) -> FeatureSet:
    return featurize(null_samples(n, n_prime, seed), cfg=cfg, threads=threads)


def statistic_values(statistic: str, fs: FeatureSet, model: NetworkModel | None = None) -> np.ndarray:
    """Deep-test scores (``statistic`` is an architecture tag) or indicator statistics."""
    if statistic in TEST_INDICATORS:
        return indicator_statistics(fs, statistic)
    if model is None:
        raise InvalidInputError(f"statistic {statistic!r} is not an indicator and no model was given")
    if statistic != model.tag:
        raise InvalidInputError(f"statistic {statistic!r} does not match the model tag {model.tag!r}")
    return predict(model, fs)


def null_scores(
    statistic: str,
    n: int,
    n_prime: int,
    seed: int,
    model: NetworkModel | None = None,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    threads: int = 1,
) -> np.ndarray:
    """Statistic values on ``n_prime`` seeded independent samples of size ``n``."""
    return statistic_values(statistic, null_features(n, n_prime, seed, cfg, threads), model)


def critical_value(scores, alpha: float) -> float:
    """Smallest observed ``d`` with ``#{scores > d} / N' <= alpha``.

    Examples
    --------
    >>> critical_value([1.0, 2.0, 3.0, 4.0], 0.5)
    2.0
    """
    s = np.sort(np.asarray(scores, dtype=np.float64))
    if s.size == 0:
        raise InvalidInputError("critical_value needs at least one score")
    if not (0.0 < alpha < 1.0):
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    if np.any(np.isnan(s)):
        raise InvalidInputError("scores contain NaN")
    above = s.size - np.searchsorted(s, s, side="right")
    ok = above <= alpha * s.size
    return float(s[int(np.argmax(ok))])


@dataclass(frozen=True)
class CalibrationEntry:
    statistic: str
    n: int
    alpha: float
    d_alpha: float
    n_prime: int
    seed: int
    model_hash: str | None = None

    def key(self) -> tuple[str, int, float]:
        return (self.statistic, self.n, self.alpha)

    def to_dict(self) -> dict:
        d = {
            "statistic": self.statistic,
            "n": self.n,
            "alpha": self.alpha,
            "d_alpha": self.d_alpha,
            "n_prime": self.n_prime,
            "seed": self.seed,
        }
        if self.model_hash is not None:
            d["model_hash"] = self.model_hash
        return d


@dataclass
class CalibrationTable:
    entries: dict[tuple[str, int, float], CalibrationEntry] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add(self, entry: CalibrationEntry) -> None:
        if entry.n_prime < 1:
            raise InvalidInputError("n_prime must be >= 1")
        self.entries[entry.key()] = entry

    def merge(self, other: "CalibrationTable") -> None:
        for e in other.entries.values():
            self.add(e)

    def get(self, statistic: str, n: int, alpha: float) -> CalibrationEntry:
        try:
            return self.entries[(statistic, int(n), float(alpha))]
        except KeyError:
            raise CalibrationMissingError(
                f"no calibration for statistic {statistic!r} at n={n}, alpha={alpha}"
            ) from None

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        ordered = sorted(self.entries.values(), key=lambda e: (e.statistic, e.n, e.alpha))
        return {
            "schema": CALIBRATION_SCHEMA,
            "meta": self.meta,
            "entries": [e.to_dict() for e in ordered],
        }

    @classmethod
    def from_dict(cls, doc: dict, source: str = "<calibration>") -> "CalibrationTable":
        if not isinstance(doc, dict) or doc.get("schema") != CALIBRATION_SCHEMA:
            raise SchemaError(f"{source}: field 'schema' must be {CALIBRATION_SCHEMA!r}")
        raw = doc.get("entries")
        if not isinstance(raw, list):
            raise SchemaError(f"{source}: field 'entries' must be a list")
        table = cls(meta=dict(doc.get("meta", {})))
        for i, e in enumerate(raw):
            for key in ("statistic", "n", "alpha", "d_alpha", "n_prime", "seed"):
                if key not in e:
                    raise SchemaError(f"{source}: entries[{i}]: missing field {key!r}")
            try:
                entry = CalibrationEntry(
                    str(e["statistic"]),
                    int(e["n"]),
                    float(e["alpha"]),
                    float(e["d_alpha"]),
                    int(e["n_prime"]),
                    int(e["seed"]),
                    e.get("model_hash"),
                )
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{source}: entries[{i}]: bad value ({exc})") from None
            if entry.n_prime < 1:
                raise SchemaError(f"{source}: entries[{i}]: field 'n_prime' must be >= 1")
            if not math.isfinite(entry.d_alpha):
                raise SchemaError(f"{source}: entries[{i}]: field 'd_alpha' must be finite")
            table.add(entry)
        return table

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CalibrationTable":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise SchemaError(f"{path}: cannot read ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
        return cls.from_dict(doc, str(path))


def calibrate(
    statistics,
    sizes,
    alphas,
    n_prime: int,
    seed: int,
    models: Mapping[str, NetworkModel] | None = None,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    threads: int = 1,
) -> CalibrationTable:
    """Calibration table for every (statistic, n, alpha).

    Deep-test statistics are architecture tags looked up in ``models``. All
    statistics at one ``n`` share the same null samples.
    """
    table = CalibrationTable(meta={"tool_version": __version__, "seed": int(seed), "n_prime": int(n_prime)})
    for n in sizes:
        fs = null_features(int(n), n_prime, seed, cfg, threads)
        table.merge(calibrate_features(statistics, fs, alphas, seed, models))
    return table


def calibrate_features(
    statistics,
    fs: FeatureSet,
    alphas,
    seed: int,
    models: Mapping[str, NetworkModel] | None = None,
) -> CalibrationTable:
    """Calibration entries from precomputed null features of a single sample size.

    ``seed`` is only recorded; it should be the seed ``fs`` was generated from.
    """
    models = dict(models or {})
    sizes = np.unique(fs.n)
    if sizes.size != 1:
        raise InvalidInputError(f"null features must share one sample size, got {sizes.tolist()}")
    n = int(sizes[0])
    n_prime = len(fs)
    table = CalibrationTable(meta={"tool_version": __version__, "seed": int(seed), "n_prime": n_prime})
    for stat in statistics:
        model = models.get(stat)
        scores = statistic_values(stat, fs, model)
        mh = None if model is None else model_hash(model)
        for a in alphas:
            d = critical_value(scores, float(a))
            table.add(CalibrationEntry(stat, int(n), float(a), d, n_prime, int(seed), mh))
    return table


@dataclass(frozen=True)
class TestResult:
    statistic: str
    value: float
    d_alpha: float
    alpha: float
    n: int
    reject: bool

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "score": self.value,
            "d_alpha": self.d_alpha,
            "alpha": self.alpha,
            "n": self.n,
            "reject": self.reject,
        }


def _lookup(table, statistic, n, alpha, n_prime, seed, model, cfg) -> float:
    if table is not None:
        try:
            entry = table.get(statistic, n, alpha)
        except CalibrationMissingError:
            if n_prime is None:
                raise
        else:
            if model is not None and entry.model_hash is not None and entry.model_hash != model_hash(model):
                raise CalibrationMissingError(
                    f"calibration for {statistic!r} at n={n} was made for a different model"
                )
            return entry.d_alpha
    if n_prime is None:
        raise CalibrationMissingError(f"no calibration for {statistic!r} at n={n}, alpha={alpha}")
    scores = null_scores(statistic, n, n_prime, seed, model, cfg)
    return critical_value(scores, alpha)


def deep_test(
    sample: BivariateSample,
    model: NetworkModel,
    table: CalibrationTable | None,
    alpha: float,
    n_prime: int | None = None,
    seed: int = 0,
    cfg: FeatureConfig = DEFAULT_FEATURES,
) -> TestResult:
    """Reject independence iff the network score exceeds ``d_alpha``.

    Without a matching table entry, ``n_prime`` enables on-the-fly calibration;
    otherwise :class:`CalibrationMissingError` is raised.
    """
    d = _lookup(table, model.tag, sample.n, alpha, n_prime, seed, model, cfg)
    fs = _single(sample, cfg)
    score = float(predict(model, fs)[0])
    return TestResult(model.tag, score, d, alpha, sample.n, score > d)


def indicator_test(
    sample: BivariateSample,
    indicator: str,
    table: CalibrationTable | None,
    alpha: float,
    n_prime: int | None = None,
    seed: int = 0,
    cfg: FeatureConfig = DEFAULT_FEATURES,
) -> TestResult:
    """Single-indicator near-exact test; see the module notes for sidedness."""
    if indicator not in TEST_INDICATORS:
        raise InvalidInputError(f"unknown indicator {indicator!r}")
    d = _lookup(table, indicator, sample.n, alpha, n_prime, seed, None, cfg)
    value = float(indicator_statistics(_single(sample, cfg), indicator)[0])
    return TestResult(indicator, value, d, alpha, sample.n, value > d)


def _single(sample: BivariateSample, cfg: FeatureConfig) -> FeatureSet:
    f = features_of(sample, cfg)
    return FeatureSet(f.image[None, :], f.indicators[None, :], None, np.array([f.hellinger_b]))
