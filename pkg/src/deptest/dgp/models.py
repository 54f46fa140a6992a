"""Parametric dependence models.

Draw order
----------
Every sample comes from a single PCG64 stream seeded with ``GenSpec.seed``.
Draws happen in this order, which is part of the seed contract:

1. structural parameters, in the order listed in ``_STRUCTURES`` docstrings;
2. per-point latent variables, each as one length-``n`` vector;
3. the noise scale ``sigma`` (one uniform draw, noise class L1 only);
4. ``n`` standard normals scaled by ``sigma_k``;
5. the rotation angle (one uniform draw), for rotated models.

Noise drivers
-------------
Noise classes L2 and L3 scale ``sigma_k`` by ``|a + b x_k|`` and
``|a - b |x_k||``. When noise is added before the rotation, ``x_k`` is the
first structural coordinate before rotation (the rotated one depends on the
noise itself). When noise is added after the rotation, ``x_k`` is the rotated
first coordinate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..errors import InvalidInputError
from ..sample import BivariateSample
from ..seeding import generator
from .images import gen_from_image, infinity_mask, pi_mask

TWO_PI = 2.0 * math.pi


class ModelId(str, enum.Enum):
    LINEAR = "linear"
    DIAMOND = "diamond"
    TRIANGLE = "triangle"
    CRESCENT = "crescent"
    POINTS = "points"
    EXPONENTIAL = "exponential"
    CIRCLES = "circles"
    CROSS = "cross"
    WEDGE = "wedge"
    CUBIC = "cubic"
    WSHAPE = "w-shape"
    PARABOLA = "parabola"
    TWO_PARABOLA = "two-parabola"
    SINE = "sine"
    DOPPLER = "doppler"
    HEAVY_SINE = "heavy-sine"
    HEART = "heart"
    SPIRAL = "spiral"
    TAEGEUK = "taegeuk"
    SAMTAEGEUK = "samtaegeuk"
    LAPLACE = "laplace"
    ISHIGAMI = "ishigami"
    TREE_RING = "tree-ring"
    VARIANCE = "variance"
    INFINITY = "infinity"
    PI = "pi"
    INDEPENDENT = "independent"

    @classmethod
    def parse(cls, name) -> "ModelId":
        if isinstance(name, ModelId):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for m in cls:
            if m.value == key or m.name.lower().replace("_", "-") == key:
                return m
        raise InvalidInputError(f"unknown model {name!r}")


TRAINING_MODELS: tuple[ModelId, ...] = tuple(list(ModelId)[:20])
EXTRA_MODELS: tuple[ModelId, ...] = (ModelId.LAPLACE, ModelId.ISHIGAMI, ModelId.TREE_RING, ModelId.VARIANCE)
IMAGE_MODELS: tuple[ModelId, ...] = (ModelId.INFINITY, ModelId.PI)
NOISE_CLASSES = ("L1", "L2", "L3")
VARIANTS = ("A", "B")
ROLES = ("train", "test")


@dataclass(frozen=True)
class GenSpec:
    """Everything needed to generate one sample.

    ``noise_class`` applies to the twenty training models, ``variant`` to the
    four extra models and the two images. ``sigma``, when given, replaces the
    drawn L1 noise scale (the draw still happens so the stream stays aligned).
    """

    model: ModelId
    n: int
    role: str = "train"
    noise_class: str | None = None
    variant: str | None = None
    seed: int = 0
    sigma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", ModelId.parse(self.model))
        if int(self.n) < 2:
            raise InvalidInputError(f"n must be >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.role not in ROLES:
            raise InvalidInputError(f"role must be one of {ROLES}, got {self.role!r}")
        m = self.model
        if m in TRAINING_MODELS:
            if self.noise_class not in NOISE_CLASSES:
                raise InvalidInputError(f"{m.value} needs noise_class in {NOISE_CLASSES}")
            if self.variant is not None:
                raise InvalidInputError(f"{m.value} takes no variant")
        elif m is not ModelId.INDEPENDENT:
            if self.variant not in VARIANTS:
                raise InvalidInputError(f"{m.value} needs variant in {VARIANTS}")
            if self.noise_class is not None:
                raise InvalidInputError(f"{m.value} takes no noise class")
        if self.sigma is not None:
            if not (m in TRAINING_MODELS and self.noise_class == "L1"):
                raise InvalidInputError("a sigma override needs a training model with noise class L1")
            if not (self.sigma >= 0 and math.isfinite(self.sigma)):
                raise InvalidInputError("sigma override must be finite and >= 0")

    def to_dict(self) -> dict:
        d = {"model": self.model.value, "n": self.n, "role": self.role, "seed": self.seed}
        if self.noise_class is not None:
            d["noise_class"] = self.noise_class
        if self.variant is not None:
            d["variant"] = self.variant
        if self.sigma is not None:
            d["sigma"] = self.sigma
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenSpec":
        return cls(
            model=ModelId.parse(d["model"]),
            n=int(d["n"]),
            role=d.get("role", "train"),
            noise_class=d.get("noise_class"),
            variant=d.get("variant"),
            seed=int(d["seed"]),
            sigma=d.get("sigma"),
        )


@dataclass(frozen=True)
class Noise:
    """Noise scale table for one model.

    ``l1`` ranges are ``U[lo, hi]``; ``l2`` pairs ``(a, b)`` mean
    ``|a + b x|``; ``l3`` pairs mean ``|a - b |x||``. Index 0 is the training
    role, index 1 the test role.
    """

    l1: tuple[tuple[float, float], tuple[float, float]]
    l2: tuple[tuple[float, float], tuple[float, float]]
    l3: tuple[tuple[float, float], tuple[float, float]]


def _noise(l1_train, l1_test, c_train, l2_test, l3_test) -> Noise:
    return Noise(
        l1=((0.0, l1_train), l1_test if isinstance(l1_test, tuple) else (0.0, l1_test)),
        l2=((0.0, c_train), l2_test),
        l3=((c_train, c_train), l3_test),
    )


# Test-role bounds printed as "U_{[0,2}" and similar are read as U[0, 2] etc.
_NOISE: dict[ModelId, Noise] = {
    ModelId.LINEAR: _noise(1.0, 2.0, 0.5, (0.75, 0.75), (1.5, 0.75)),
    ModelId.DIAMOND: _noise(0.25, 0.5, 0.2, (0.25, 0.25), (0.5, 0.25)),
    ModelId.TRIANGLE: _noise(0.5, 0.5, 0.3, (0.25, 0.25), (0.5, 0.25)),
    ModelId.CRESCENT: _noise(0.5, 1.0, 0.3, (0.25, 0.25), (0.5, 0.25)),
    ModelId.EXPONENTIAL: _noise(0.5, 2.0, 0.3, (0.5, 0.5), (1.0, 0.5)),  # test L1 printed U_[0,2
    ModelId.CIRCLES: _noise(0.5, 1.0, 0.3, (0.0, 0.5), (0.5, 0.5)),  # test L1 printed U_[0,1
    ModelId.CROSS: _noise(0.5, 1.0, 0.3, (0.25, 0.25), (0.5, 0.25)),
    ModelId.WEDGE: _noise(1.0, (2.0, 4.0), 0.5, (2.0, 1.0), (2.0, 1.0)),  # test L1 printed U_[2,4
    ModelId.CUBIC: _noise(0.25, 1.0, 0.2, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.WSHAPE: _noise(0.3, 1.0, 0.2, (0.5, 0.5), (1.0, 0.5)),  # test L1 printed U_[0,1
    ModelId.PARABOLA: _noise(0.3, 1.0, 0.2, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.TWO_PARABOLA: _noise(0.4, 1.0, 0.3, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.SINE: _noise(1.0, 1.0, 0.5, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.DOPPLER: _noise(1.0, 1.0, 0.5, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.HEAVY_SINE: _noise(1.0, 1.0, 0.5, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.HEART: _noise(0.5, 1.0, 0.3, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.SPIRAL: _noise(0.3, 0.5, 0.2, (0.1, 0.1), (0.2, 0.1)),  # test L1 printed U_[0,0.5
    ModelId.TAEGEUK: _noise(0.3, 1.0, 0.2, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
    ModelId.SAMTAEGEUK: _noise(0.3, 1.0, 0.2, (0.25, 0.25), (0.5, 0.25)),  # test L1 printed U_[0,1
}

# Where the noise enters relative to the rotation, per role (train, test).
#   "none": no random rotation, noise on the second coordinate
#   "before": Theta (x, y + eps)       "after": Theta (x, y) + (0, eps)
_PLACEMENT: dict[ModelId, tuple[str, str]] = {
    ModelId.LINEAR: ("none", "none"),
    ModelId.DIAMOND: ("none", "none"),  # rotation is structural, noise added afterwards
    ModelId.TRIANGLE: ("before", "before"),
    ModelId.CIRCLES: ("before", "before"),
    ModelId.CROSS: ("after", "after"),
}
_DEFAULT_PLACEMENT = ("before", "after")

_ANGLE: dict[ModelId, tuple[float, float]] = {
    ModelId.CROSS: (-math.pi / 6, math.pi / 6),
    ModelId.WEDGE: (-math.pi / 6, math.pi / 6),
}

_POINT_SETS = (
    ((1, 0), (-1, 0), (0, 1)),
    ((1, 0), (-1, 0), (0, 0), (0, 1), (0, -1)),
    ((1, 1), (-1, 1), (0, 0), (1, -1), (-1, -1)),
)
_CIRCLE_CENTERS = (
    ((0, 0),),
    ((1, 0), (-1, 0), (0, 1)),
    ((1, 1), (-1, 1), (1, -1), (-1, -1)),
)


def _resampled_centers(rng, n, sets):
    """Pick a set w.p. 1/3 each, draw n points from it, then resample them with replacement.

    The resampling keeps pairs together (see the decisions ledger).
    """
    pts = np.asarray(sets[int(rng.integers(3))], dtype=np.float64)
    base = pts[rng.integers(len(pts), size=n)]
    pick = rng.integers(n, size=n)
    return base[pick, 0], base[pick, 1]


# Structural parts: (rng, n, role, noise_class) -> (x, y, params)


def _linear(rng, n, role, cls):
    """beta ~ .5 U[-2,-.5] + .5 U[.5,2] (component, then value); U ~ U[-1,1]."""
    neg = rng.random() < 0.5
    beta = rng.uniform(-2.0, -0.5) if neg else rng.uniform(0.5, 2.0)
    u = rng.uniform(-1.0, 1.0, n)
    return u, beta * u, {"beta": beta}


def _diamond(rng, n, role, cls):
    """theta ~ U[pi/6, pi/3]; U, V ~ U[-1,1]; structural rotation of (U, V)."""
    theta = rng.uniform(math.pi / 6, math.pi / 3)
    u = rng.uniform(-1.0, 1.0, n)
    v = rng.uniform(-1.0, 1.0, n)
    c, s = math.cos(theta), math.sin(theta)
    return u * c - v * s, u * s + v * c, {"theta": theta, "u": u, "v": v}


def _triangle(rng, n, role, cls):
    """l, r ~ U[0,1]; U ~ U[0,1]; V ~ U[-l, r]; structure (UV, U)."""
    lft = rng.uniform(0.0, 1.0)
    rgt = rng.uniform(0.0, 1.0)
    u = rng.uniform(0.0, 1.0, n)
    v = rng.uniform(-lft, rgt, n)
    return u * v, u, {"l": lft, "r": rgt}


def _crescent(rng, n, role, cls):
    """c ~ U[.5,1] (test U[.25,1]); V ~ U[-1, c/2]; side and position uniforms for U."""
    c = rng.uniform(0.5, 1.0) if role == "train" else rng.uniform(0.25, 1.0)
    v = rng.uniform(-1.0, c / 2.0, n)
    side = rng.random(n) < 0.5
    w = rng.random(n)
    outer = np.sqrt(np.maximum(1.0 - v * v, 0.0))
    inner = np.sqrt(np.maximum(1.0 - (v - c) ** 2, 0.0))
    full = -outer + 2.0 * outer * w
    mag = inner + (outer - inner) * w
    split = np.where(side, -mag, mag)
    u = np.where(v < c - 1.0, full, split)
    return u, v, {"c": c}


def _points(rng, n, role, cls):
    u, v = _resampled_centers(rng, n, _POINT_SETS)
    return u, v, {}


def _exponential(rng, n, role, cls):
    """b ~ U[2,4] (train L3: U[1.5,3]); U ~ U[-1,1]; V = b^U."""
    b = rng.uniform(1.5, 3.0) if (role == "train" and cls == "L3") else rng.uniform(2.0, 4.0)
    u = rng.uniform(-1.0, 1.0, n)
    return u, b**u, {"b": b}


def _circles(rng, n, role, cls):
    """Centers (set choice, draws, resampling), then W ~ U[-1,1]."""
    cu, cv = _resampled_centers(rng, n, _CIRCLE_CENTERS)
    w = rng.uniform(-1.0, 1.0, n)
    return np.sin(math.pi * w) + cu, np.cos(math.pi * w) + cv, {"cu": cu, "cv": cv}


def _signs(rng, n):
    return np.where(rng.random(n) < 0.5, -1.0, 1.0)


def _cross(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    return u, _signs(rng, n) * u, {}


def _wedge(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    return u, 2.0 * (u + 1.0) * _signs(rng, n), {}


def _cubic(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    return u, u**3 - u, {}


def _wshape(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    return u, 4.0 * (u * u - 0.5) ** 2, {}


def _parabola(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    return u, 0.5 * u * u, {}


def _two_parabola(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    return u, _signs(rng, n) * u * u, {}


def _sine(rng, n, role, cls):
    """S ~ U[1,4]; U ~ U[-1,1]."""
    s = rng.uniform(1.0, 4.0)
    u = rng.uniform(-1.0, 1.0, n)
    return u, np.sin(s * math.pi * u), {"S": s}


def _doppler(rng, n, role, cls):
    """f ~ U[2,4]; U ~ U[-1,1]."""
    f = rng.uniform(2.0, 4.0)
    u = rng.uniform(-1.0, 1.0, n)
    return u, np.sin(-f * (1.0 + u) * (2.0 + u)), {"f": f}


def _heavy_sine(rng, n, role, cls):
    u = rng.uniform(-1.0, 1.0, n)
    v = np.sin(4.0 * math.pi * u) / 2.0
    for shift in (0.6, 0.2, -0.2, -0.6):
        v = v - np.sign(u + shift) / 8.0
    return u, v, {}


def _heart(rng, n, role, cls):
    w = rng.uniform(-1.0, 1.0, n)
    u = 0.5 * (2.0 * np.cos(math.pi * w) - np.cos(2.0 * math.pi * w))
    v = 0.5 * (2.0 * np.sin(math.pi * w) - np.sin(2.0 * math.pi * w))
    return u, v, {}


def _spiral(rng, n, role, cls):
    """k ~ U[2.5,3.5]; W ~ U[-k pi, k pi]."""
    k = rng.uniform(2.5, 3.5)
    w = rng.uniform(-k * math.pi, k * math.pi, n)
    r = np.exp(-w / 10.0)
    return r * np.cos(w), r * np.sin(w), {"k": k}


def _taegeuk(rng, n, role, cls):
    """W ~ U[-1,1]; delta from one uniform: 0 (1/2), -1 (1/4), 1 (1/4)."""
    w = rng.uniform(-1.0, 1.0, n)
    g = rng.random(n)
    delta = np.where(g < 0.5, 0.0, np.where(g < 0.75, -1.0, 1.0))
    ad = np.abs(delta)
    u = 0.5**ad * np.sin(math.pi * w) + 0.5 * delta
    v = np.abs(0.5 * np.cos(math.pi * w)) * delta + np.cos(math.pi * w) * (1.0 - ad)
    return u, v, {}


def _samtaegeuk(rng, n, role, cls):
    """W ~ U[-1,1]; delta from one uniform: 0 (1/2), 1, 2, 3 (1/6 each)."""
    w = rng.uniform(-1.0, 1.0, n)
    g = rng.random(n)
    delta = np.where(g < 0.5, 0, np.where(g < 2.0 / 3.0, 1, np.where(g < 5.0 / 6.0, 2, 3)))
    a = w * math.pi / 2.0
    shift = math.pi / 2.0 + math.pi / 6.0
    r3 = math.sqrt(3.0) / 4.0
    u = np.select(
        [delta == 0, delta == 1, delta == 2],
        [np.cos(w * math.pi), 0.5 * np.cos(a), 0.5 * np.cos(a + shift) + r3],
        0.5 * np.cos(-a - shift) - r3,
    )
    v = np.select(
        [delta == 0, delta == 1, delta == 2],
        [np.sin(w * math.pi), 0.5 * np.sin(a) - 0.5, 0.5 * np.sin(a + shift) + 0.25],
        0.5 * np.sin(-a - shift) + 0.25,
    )
    return u, v, {}


_STRUCTURES: dict[ModelId, Callable] = {
    ModelId.LINEAR: _linear,
    ModelId.DIAMOND: _diamond,
    ModelId.TRIANGLE: _triangle,
    ModelId.CRESCENT: _crescent,
    ModelId.POINTS: _points,
    ModelId.EXPONENTIAL: _exponential,
    ModelId.CIRCLES: _circles,
    ModelId.CROSS: _cross,
    ModelId.WEDGE: _wedge,
    ModelId.CUBIC: _cubic,
    ModelId.WSHAPE: _wshape,
    ModelId.PARABOLA: _parabola,
    ModelId.TWO_PARABOLA: _two_parabola,
    ModelId.SINE: _sine,
    ModelId.DOPPLER: _doppler,
    ModelId.HEAVY_SINE: _heavy_sine,
    ModelId.HEART: _heart,
    ModelId.SPIRAL: _spiral,
    ModelId.TAEGEUK: _taegeuk,
    ModelId.SAMTAEGEUK: _samtaegeuk,
}


@dataclass(frozen=True)
class Draw:
    """A generated sample together with its intermediate values."""

    spec: GenSpec
    sample: BivariateSample
    structural: tuple[np.ndarray, np.ndarray]
    theta: float | None = None
    sigma: np.ndarray | None = None
    params: dict = field(default_factory=dict)


def _rotate(x, y, theta):
    c, s = math.cos(theta), math.sin(theta)
    return x * c - y * s, x * s + y * c


def _draw_sigma(rng, spec: GenSpec) -> float | None:
    """The L1 noise scale (one uniform draw); L2 and L3 draw nothing."""
    if spec.noise_class != "L1":
        return None
    lo, hi = _NOISE[spec.model].l1[0 if spec.role == "train" else 1]
    s = rng.uniform(lo, hi)
    return float(spec.sigma) if spec.sigma is not None else float(s)


def _sigma_k(spec: GenSpec, sigma: float | None, driver: np.ndarray) -> np.ndarray:
    if sigma is not None:
        return np.full(driver.size, sigma)
    role = 0 if spec.role == "train" else 1
    table = _NOISE[spec.model]
    if spec.noise_class == "L2":
        a, b = table.l2[role]
        return np.abs(a + b * driver)
    a, b = table.l3[role]
    return np.abs(a - b * np.abs(driver))


def _draw_training_model(spec: GenSpec) -> Draw:
    rng = generator(spec.seed)
    n = spec.n
    x, y, params = _STRUCTURES[spec.model](rng, n, spec.role, spec.noise_class)
    if spec.model is ModelId.POINTS:
        # single noise structure on both coordinates, whatever the class
        sigma = rng.uniform(0.05, 0.5)
        if spec.sigma is not None:
            sigma = spec.sigma
        e1 = sigma * rng.standard_normal(n)
        e2 = sigma * rng.standard_normal(n)
        theta = rng.uniform(0.0, TWO_PI)
        z1, z2 = _rotate(x + e1, y + e2, theta)
        return Draw(spec, BivariateSample(z1, z2), (x, y), theta, np.full(n, sigma), params)

    placement = _PLACEMENT.get(spec.model, _DEFAULT_PLACEMENT)[0 if spec.role == "train" else 1]
    sigma = _draw_sigma(rng, spec)
    gauss = rng.standard_normal(n)
    if placement == "none":
        sigma_k = _sigma_k(spec, sigma, x)
        z2 = y + sigma_k * gauss
        return Draw(spec, BivariateSample(x, z2), (x, y), params.get("theta"), sigma_k, params)
    lo, hi = _ANGLE.get(spec.model, (0.0, TWO_PI))
    theta = float(rng.uniform(lo, hi))
    if placement == "after":
        rx, ry = _rotate(x, y, theta)
        sigma_k = _sigma_k(spec, sigma, rx)
        return Draw(spec, BivariateSample(rx, ry + sigma_k * gauss), (x, y), theta, sigma_k, params)
    sigma_k = _sigma_k(spec, sigma, x)
    z1, z2 = _rotate(x, y + sigma_k * gauss, theta)
    return Draw(spec, BivariateSample(z1, z2), (x, y), theta, sigma_k, params)


# --- extra models ----------------------------------------------------------


def _laplace(rng, spec):
    """rho; then W ~ Exp(1) (n); then two standard normal vectors."""
    rho = rng.uniform(0.4, 0.5) if spec.variant == "A" else rng.uniform(0.5, 0.6)
    n = spec.n
    w = rng.exponential(1.0, n)
    g1 = rng.standard_normal(n)
    g2 = rng.standard_normal(n)
    scale = np.sqrt(w)
    z1 = scale * g1
    z2 = scale * (rho * g1 + math.sqrt(1.0 - rho * rho) * g2)
    return z1, z2, {"rho": rho}


def _ishigami(rng, spec):
    """sigma; then Z1, V, W ~ U(0,1); then noise."""
    sigma = rng.uniform(0.5, 1.5) if spec.variant == "A" else rng.uniform(math.pi, 3 * math.pi)
    n = spec.n
    z1 = rng.uniform(0.0, 1.0, n)
    v = rng.uniform(0.0, 1.0, n)
    w = rng.uniform(0.0, 1.0, n)
    eps = sigma * rng.standard_normal(n)
    z2 = np.sin(z1) + 4.0 * np.sin(v) ** 2 + 0.5 * w**4 * np.sin(z1) + eps
    return z1, z2, {"sigma": sigma}


def _tree_ring(rng, spec):
    """R ~ U{2..10}, sigma; then per-point ring index L_k ~ U{1..R}, angles, then noise."""
    big_r = int(rng.integers(2, 11))
    sigma = rng.uniform(0.0, 0.5) if spec.variant == "A" else rng.uniform(0.0, 1.0)
    n = spec.n
    radius = rng.integers(1, big_r + 1, size=n).astype(np.float64)
    theta = rng.uniform(0.0, TWO_PI, n)
    v1 = sigma * rng.standard_normal(n)
    v2 = sigma * rng.standard_normal(n)
    z1 = radius * np.cos(theta) + v1 / 4.0
    z2 = radius * np.sin(theta) + v2 / 4.0
    return z1, z2, {"R": big_r, "sigma": sigma, "radius": radius}


def _variance(rng, spec):
    """p; then Z1 ~ U(0,1), V ~ N(0,1)."""
    p = rng.uniform(0.4, 0.5) if spec.variant == "A" else rng.uniform(0.5, 0.6)
    n = spec.n
    z1 = rng.uniform(0.0, 1.0, n)
    v = rng.standard_normal(n)
    return z1, np.abs(z1) ** p * v, {"p": p}


_EXTRA = {
    ModelId.LAPLACE: _laplace,
    ModelId.ISHIGAMI: _ishigami,
    ModelId.TREE_RING: _tree_ring,
    ModelId.VARIANCE: _variance,
}

IMAGE_NOISE_CAPS = {
    ModelId.INFINITY: {"A": 0.1, "B": 0.2},
    ModelId.PI: {"A": 0.5, "B": 1.0},
}


def gen_independent(n: int, seed: int) -> BivariateSample:
    """``n`` i.i.d. pairs from the uniform distribution on the unit square."""
    if int(n) < 2:
        raise InvalidInputError(f"n must be >= 2, got {n}")
    rng = generator(seed)
    z1 = rng.random(int(n))
    z2 = rng.random(int(n))
    return BivariateSample(z1, z2)


def draw_model(spec: GenSpec) -> Draw:
    """Generate ``spec`` and keep the intermediate values."""
    m = spec.model
    if m is ModelId.INDEPENDENT:
        s = gen_independent(spec.n, spec.seed)
        return Draw(spec, s, (s.z1, s.z2))
    if m in TRAINING_MODELS:
        return _draw_training_model(spec)
    if m in _EXTRA:
        z1, z2, params = _EXTRA[m](generator(spec.seed), spec)
        return Draw(spec, BivariateSample(z1, z2), (z1, z2), params=params)
    mask = infinity_mask() if m is ModelId.INFINITY else pi_mask()
    s = gen_from_image(mask, spec.n, IMAGE_NOISE_CAPS[m][spec.variant], spec.seed)
    return Draw(spec, s, (s.z1, s.z2))


def gen_model(spec: GenSpec) -> BivariateSample:
    """Generate one sample according to ``spec``."""
    return draw_model(spec).sample


def with_seed(spec: GenSpec, seed: int) -> GenSpec:
    return replace(spec, seed=int(seed))
