"""Margin-free features: the copula histogram image and the indicator vector.

Both featurizers only see a :class:`~deptest.sample.PseudoSample`, so they are
invariant under strictly increasing transforms of either margin.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import indicators as ind
from . import permtests as pt
from .errors import InsufficientSampleError, SchemaError
from .parallel import pmap
from .sample import BivariateSample, PseudoSample, to_pseudo

GRID_SIZE = 25
N_INDICATORS = 20

# Frozen feature order; part of the model-file contract.
INDICATOR_NAMES: tuple[str, ...] = (
    "spearman",
    "kendall",
    "blomqvist",
    "auk",
    "hoeffding",
    "hellinger",
    "linfoot_mi",
    "mic",
    "ace",
    "rdc",
    "dcor",
    "mdc",
    "hsic",
    "hhg_chi2_sum",
    "hhg_lik_sum",
    "hhg_chi2_max",
    "hhg_lik_max",
    "ddr_v",
    "ddr_s2",
    "n",
)
assert tuple(name for name, _ in ind.MEASURES) == INDICATOR_NAMES[:13]
assert set(pt.PERM_STATISTICS) == set(INDICATOR_NAMES[13:19])


def indicator_ordering_hash() -> str:
    """Short digest of :data:`INDICATOR_NAMES`, stored in model files."""
    return hashlib.sha256(",".join(INDICATOR_NAMES).encode("ascii")).hexdigest()[:16]


@dataclass(frozen=True)
class FeatureConfig:
    measures: ind.MeasureConfig = field(default_factory=ind.MeasureConfig)
    perm: pt.PermConfig = field(default_factory=pt.PermConfig)
    grid: int = GRID_SIZE

    def to_dict(self) -> dict:
        m, p = self.measures, self.perm
        return {
            "measures": {k: getattr(m, k) for k in m.__dataclass_fields__},
            "perm": {k: getattr(p, k) for k in p.__dataclass_fields__},
            "grid": self.grid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(ind.MeasureConfig(**d["measures"]), pt.PermConfig(**d["perm"]), int(d["grid"]))


DEFAULT_FEATURES = FeatureConfig()


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Bin counts of the pseudo-sample on a regular grid.

    ``raw_counts[a, b]`` counts points with ``u`` in bin ``a`` and ``v`` in
    bin ``b``; ``bins`` is ``raw_counts`` divided by its largest entry.
    """

    raw_counts: np.ndarray
    bins: np.ndarray

    def flat(self) -> np.ndarray:
        """Column-major flattening (the persisted layout)."""
        return self.bins.ravel(order="F")


def bin_index(ranks: np.ndarray, n: int, grid: int = GRID_SIZE) -> np.ndarray:
    """``min(floor(u * grid), grid - 1)`` for ``u = r / (n + 1)``, in exact integer arithmetic."""
    return np.minimum((np.asarray(ranks, dtype=np.int64) * grid) // (n + 1), grid - 1)


def image_grid(ps: PseudoSample, grid: int = GRID_SIZE) -> ImageGrid:
    """Normalized ``grid x grid`` histogram of the pseudo-observations."""
    n = ps.n
    a = bin_index(ps.ranks_u, n, grid)
    b = bin_index(ps.ranks_v, n, grid)
    counts = np.zeros((grid, grid), dtype=np.int64)
    np.add.at(counts, (a, b), 1)
    bins = counts / counts.max()
    counts.setflags(write=False)
    bins.setflags(write=False)
    return ImageGrid(counts, bins)


@dataclass(frozen=True, eq=False)
class IndicatorVector:
    """The 20 indicator features in :data:`INDICATOR_NAMES` order.

    ``hellinger_b`` keeps the unclamped estimate behind the ``hellinger``
    entry; the single-indicator Hellinger test is calibrated on it.
    """

    values: np.ndarray
    hellinger_b: float

    def __getitem__(self, name: str) -> float:
        return float(self.values[INDICATOR_NAMES.index(name)])


def indicator_vector(ps: PseudoSample, cfg: FeatureConfig = DEFAULT_FEATURES) -> IndicatorVector:
    """Thirteen measures, six one-minus-p-values and the sample size."""
    n = ps.n
    if n < 5:
        raise InsufficientSampleError(f"the indicator vector needs n >= 5, got {n}")
    out = np.empty(N_INDICATORS)
    out[:13] = ind.all_measures(ps, cfg.measures)
    pv = pt.all_pvalues(ps, cfg.perm)
    for j, name in enumerate(INDICATOR_NAMES[13:19], start=13):
        out[j] = 1.0 - pv[name]
    out[19] = float(n)
    out.setflags(write=False)
    return IndicatorVector(out, ind.hellinger_b(ps))


@dataclass(frozen=True, eq=False)
class Features:
    """Both representations of one sample."""

    n: int
    image: np.ndarray  # 625 entries, column-major
    indicators: np.ndarray  # 20 entries
    hellinger_b: float
    ties: bool = False


def features_of_pseudo(ps: PseudoSample, cfg: FeatureConfig = DEFAULT_FEATURES) -> Features:
    iv = indicator_vector(ps, cfg)
    return Features(ps.n, image_grid(ps, cfg.grid).flat(), iv.values, iv.hellinger_b, ps.ties)


def features_of(sample: BivariateSample, cfg: FeatureConfig = DEFAULT_FEATURES) -> Features:
    return features_of_pseudo(to_pseudo(sample, warn=False), cfg)


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Stacked features with optional labels, ready for training or scoring."""

    images: np.ndarray  # (N, grid*grid)
    indicators: np.ndarray  # (N, 20)
    labels: np.ndarray | None = None  # (N,) of 0/1
    hellinger_b: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.indicators.shape[0])

    @property
    def n(self) -> np.ndarray:
        return self.indicators[:, 19].astype(np.int64)

    def subset(self, idx) -> "FeatureSet":
        idx = np.asarray(idx)
        return FeatureSet(
            self.images[idx],
            self.indicators[idx],
            None if self.labels is None else self.labels[idx],
            None if self.hellinger_b is None else self.hellinger_b[idx],
        )

    def __eq__(self, other):
        if not isinstance(other, FeatureSet):
            return NotImplemented
        same = np.array_equal(self.images, other.images) and np.array_equal(self.indicators, other.indicators)
        if (self.labels is None) != (other.labels is None):
            return False
        return same and (self.labels is None or np.array_equal(self.labels, other.labels))

    __hash__ = None


def stack(features: Sequence[Features], labels: Sequence[int] | None = None) -> FeatureSet:
    images = np.stack([f.image for f in features]) if features else np.zeros((0, GRID_SIZE**2))
    inds = np.stack([f.indicators for f in features]) if features else np.zeros((0, N_INDICATORS))
    hb = np.array([f.hellinger_b for f in features], dtype=np.float64)
    lab = None if labels is None else np.asarray(labels, dtype=np.int64)
    return FeatureSet(images, inds, lab, hb)


def featurize(
    samples: Sequence[BivariateSample],
    labels: Sequence[int] | None = None,
    cfg: FeatureConfig = DEFAULT_FEATURES,
    threads: int = 1,
) -> FeatureSet:
    """Featurize many samples; output order follows input order."""
    feats = pmap(lambda s: features_of(s, cfg), samples, threads)
    return stack(feats, labels)


# --- persistence -------------------------------------------------------------

FEATURES_SCHEMA = "deptest.features/1"


def feature_set_to_json(fs: FeatureSet, cfg: FeatureConfig = DEFAULT_FEATURES) -> str:
    records = []
    for i in range(len(fs)):
        rec = {
            "n": int(fs.indicators[i, 19]),
            "image": fs.images[i].tolist(),
            "indicators": fs.indicators[i].tolist(),
        }
        if fs.labels is not None:
            rec["label"] = int(fs.labels[i])
        if fs.hellinger_b is not None:
            rec["hellinger_b"] = float(fs.hellinger_b[i])
        records.append(rec)
    doc = {
        "schema": FEATURES_SCHEMA,
        "indicator_names": list(INDICATOR_NAMES),
        "indicator_hash": indicator_ordering_hash(),
        "config": cfg.to_dict(),
        "records": records,
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def _field(rec: dict, key: str, i: int, source: str):
    if key not in rec:
        raise SchemaError(f"{source}: records[{i}]: missing field {key!r}")
    return rec[key]


def feature_set_from_json(text: str, source: str = "<string>") -> FeatureSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(doc, dict) or doc.get("schema") != FEATURES_SCHEMA:
        raise SchemaError(f"{source}: field 'schema' must be {FEATURES_SCHEMA!r}")
    if doc.get("indicator_hash") != indicator_ordering_hash():
        raise SchemaError(f"{source}: field 'indicator_hash' does not match this version's ordering")
    records = doc.get("records")
    if not isinstance(records, list):
        raise SchemaError(f"{source}: field 'records' must be a list")
    images, inds, labels, hb = [], [], [], []
    for i, rec in enumerate(records):
        img = np.asarray(_field(rec, "image", i, source), dtype=np.float64)
        iv = np.asarray(_field(rec, "indicators", i, source), dtype=np.float64)
        if img.shape != (GRID_SIZE * GRID_SIZE,):
            raise SchemaError(f"{source}: records[{i}]: field 'image' must hold {GRID_SIZE**2} values")
        if iv.shape != (N_INDICATORS,):
            raise SchemaError(f"{source}: records[{i}]: field 'indicators' must hold {N_INDICATORS} values")
        if int(_field(rec, "n", i, source)) != iv[19]:
            raise SchemaError(f"{source}: records[{i}]: field 'n' disagrees with the last indicator")
        images.append(img)
        inds.append(iv)
        if "label" in rec:
            labels.append(int(rec["label"]))
        if "hellinger_b" in rec:
            hb.append(float(rec["hellinger_b"]))
    if labels and len(labels) != len(records):
        raise SchemaError(f"{source}: field 'label' present on some records only")
    if labels and not set(labels) <= {0, 1}:
        raise SchemaError(f"{source}: field 'label' must be 0 or 1")
    return FeatureSet(
        np.array(images).reshape(len(records), GRID_SIZE * GRID_SIZE),
        np.array(inds).reshape(len(records), N_INDICATORS),
        np.array(labels, dtype=np.int64) if labels else None,
        np.array(hb) if len(hb) == len(records) else None,
    )


def write_feature_set(fs: FeatureSet, path, cfg: FeatureConfig = DEFAULT_FEATURES) -> None:
    Path(path).write_text(feature_set_to_json(fs, cfg), encoding="utf-8")


def read_feature_set(path) -> FeatureSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror})") from None
    return feature_set_from_json(text, str(path))
