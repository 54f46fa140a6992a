"""Layer kinds with hand-written forward and backward passes.

Activations are float64 batches. Images are channels-last, ``(B, H, W, C)``.
Parameter layouts (row-major):

* dense: ``W`` of shape ``(fan_in, width)``, ``b`` of shape ``(width,)``;
* conv2d_same_3x3: ``W`` of shape ``(3, 3, c_in, filters)``, ``b`` of shape ``(filters,)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

KINDS = (
    "dense",
    "conv2d_same_3x3",
    "maxpool_3x3_stride3",
    "dropout",
    "flatten_colmajor",
    "concat",
    "relu",
    "sigmoid",
)


@dataclass(frozen=True)
class LayerSpec:
    """One layer. ``width`` is the unit count (dense) or filter count (conv)."""

    kind: str
    width: int = 0
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown layer kind {self.kind!r}")
        if self.kind in ("dense", "conv2d_same_3x3") and self.width < 1:
            raise InvalidInputError(f"{self.kind} needs width >= 1")
        if self.kind == "dropout" and not (0.0 <= self.rate < 1.0):
            raise InvalidInputError(f"dropout rate must lie in [0, 1), got {self.rate}")

    @property
    def trainable(self) -> bool:
        return self.kind in ("dense", "conv2d_same_3x3")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.trainable:
            d["width"] = self.width
        if self.kind == "dropout":
            d["rate"] = self.rate
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        return cls(str(d["kind"]), int(d.get("width", 0)), float(d.get("rate", 0.0)))


def dense(width: int) -> LayerSpec:
    return LayerSpec("dense", width)


def conv(filters: int) -> LayerSpec:
    return LayerSpec("conv2d_same_3x3", filters)


def dropout(rate: float = 0.2) -> LayerSpec:
    return LayerSpec("dropout", rate=rate)


RELU = LayerSpec("relu")
SIGMOID = LayerSpec("sigmoid")
MAXPOOL = LayerSpec("maxpool_3x3_stride3")
FLATTEN = LayerSpec("flatten_colmajor")


def output_shape(spec: LayerSpec, shape: tuple[int, ...]) -> tuple[int, ...]:
    """Per-sample output shape of ``spec`` given the per-sample input shape."""
    k = spec.kind
    if k == "dense":
        if len(shape) != 1:
            raise InvalidInputError(f"dense expects a vector input, got shape {shape}")
        return (spec.width,)
    if k == "conv2d_same_3x3":
        if len(shape) != 3:
            raise InvalidInputError(f"conv expects (H, W, C) input, got shape {shape}")
        return (shape[0], shape[1], spec.width)
    if k == "maxpool_3x3_stride3":
        if len(shape) != 3 or min(shape[:2]) < 3:
            raise InvalidInputError(f"maxpool expects (H, W, C) with H, W >= 3, got {shape}")
        return (shape[0] // 3, shape[1] // 3, shape[2])
    if k == "flatten_colmajor":
        return (int(np.prod(shape)),)
    return shape


def param_shapes(spec: LayerSpec, shape: tuple[int, ...]) -> list[tuple[int, ...]]:
    if spec.kind == "dense":
        return [(shape[0], spec.width), (spec.width,)]
    if spec.kind == "conv2d_same_3x3":
        return [(3, 3, shape[2], spec.width), (spec.width,)]
    return []


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Uniform on ``[-l, l]`` with ``l = sqrt(6 / (fan_in + fan_out))``."""
    if len(shape) == 2:
        fan_in, fan_out = shape
    else:
        receptive = shape[0] * shape[1]
        fan_in, fan_out = receptive * shape[2], receptive * shape[3]
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


# --- forward / backward kernels ---------------------------------------------
# Each forward returns (output, cache); each backward maps (grad_out, cache)
# to (grad_in, [param grads]).


def dense_forward(x, W, b):
    return x @ W + b, x


def dense_backward(g, x, W):
    return g @ W.T, [x.T @ g, g.sum(axis=0)]


def conv_forward(x, W, b):
    bsz, h, w, _ = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    out = np.empty((bsz, h, w, W.shape[3]))
    out[...] = b
    for di in range(3):
        for dj in range(3):
            out += xp[:, di : di + h, dj : dj + w, :] @ W[di, dj]
    return out, xp


def conv_backward(g, xp, W):
    bsz, h, w, _ = g.shape
    dW = np.empty_like(W)
    dxp = np.zeros_like(xp)
    g2 = g.reshape(-1, g.shape[3])
    for di in range(3):
        for dj in range(3):
            patch = xp[:, di : di + h, dj : dj + w, :]
            dW[di, dj] = patch.reshape(-1, patch.shape[3]).T @ g2
            dxp[:, di : di + h, dj : dj + w, :] += g @ W[di, dj].T
    return dxp[:, 1:-1, 1:-1, :], [dW, g2.sum(axis=0)]


def maxpool_forward(x):
    bsz, h, w, c = x.shape
    ho, wo = h // 3, w // 3
    blocks = x[:, : ho * 3, : wo * 3, :].reshape(bsz, ho, 3, wo, 3, c)
    blocks = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(bsz, ho, wo, c, 9)
    arg = blocks.argmax(axis=-1)  # first maximum wins on ties
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, (x.shape, arg)


def maxpool_backward(g, cache):
    shape, arg = cache
    bsz, h, w, c = shape
    ho, wo = h // 3, w // 3
    blocks = np.zeros((bsz, ho, wo, c, 9))
    np.put_along_axis(blocks, arg[..., None], g[..., None], axis=-1)
    blocks = blocks.reshape(bsz, ho, wo, c, 3, 3).transpose(0, 1, 4, 2, 5, 3)
    dx = np.zeros(shape)
    dx[:, : ho * 3, : wo * 3, :] = blocks.reshape(bsz, ho * 3, wo * 3, c)
    return dx


def flatten_forward(x):
    """Column-major flattening of each ``(H, W, C)`` sample: ``h`` varies fastest."""
    bsz = x.shape[0]
    axes = (0,) + tuple(range(x.ndim - 1, 0, -1))
    return x.transpose(axes).reshape(bsz, -1), x.shape


def flatten_backward(g, shape):
    rev = (shape[0],) + tuple(reversed(shape[1:]))
    axes = (0,) + tuple(range(len(shape) - 1, 0, -1))
    return g.reshape(rev).transpose(axes)


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted dropout: kept units are scaled by ``1 / (1 - rate)``."""
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
