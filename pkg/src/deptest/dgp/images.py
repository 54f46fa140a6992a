"""Image-based generators: grayscale masks and the pixel-probability sampler."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError
from ..sample import BivariateSample
from ..seeding import generator


@dataclass(frozen=True, eq=False)
class ImageMask:
    """Grayscale image with ``gray[j, i]`` in [0, 1] (1 = white).

    Row ``j`` (0-based) is the ``(j+1)``-th pixel row from the top and column
    ``i`` the ``(i+1)``-th from the left, so ``width = gray.shape[1]``.
    """

    gray: np.ndarray

    def __post_init__(self):
        g = np.array(self.gray, dtype=np.float64, copy=True)
        if g.ndim != 2 or min(g.shape) < 2:
            raise InvalidInputError(f"mask must be a 2-D array with both sides >= 2, got {g.shape}")
        if not np.all(np.isfinite(g)) or g.min() < 0 or g.max() > 1:
            raise InvalidInputError("mask values must lie in [0, 1]")
        if np.all(g == 1.0):
            raise InvalidInputError("mask is entirely white; sampling probabilities undefined")
        g.setflags(write=False)
        object.__setattr__(self, "gray", g)

    @property
    def width(self) -> int:
        return int(self.gray.shape[1])

    @property
    def height(self) -> int:
        return int(self.gray.shape[0])

    def probabilities(self) -> np.ndarray:
        dark = 1.0 - self.gray
        return dark / dark.sum()


def read_pgm(path) -> ImageMask:
    """Read an 8-bit binary PGM (P5). Pixel value 255 maps to white (gray 1)."""
    path = Path(path)
    data = path.read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InvalidInputError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise InvalidInputError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise InvalidInputError(f"{path}: malformed PGM header") from None
    if maxval != 255:
        raise InvalidInputError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pixels = data[pos + 1 : pos + 1 + width * height]
    if len(pixels) != width * height:
        raise InvalidInputError(f"{path}: expected {width * height} pixels, found {len(pixels)}")
    arr = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)
    return ImageMask(arr / 255.0)


def write_pgm(mask: ImageMask, path) -> None:
    pixels = np.rint(mask.gray * 255).astype(np.uint8)
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def _stroke_mask(size: int, segments: np.ndarray, half_width: float) -> np.ndarray:
    """Dark (0) pixels within ``half_width`` of any polyline segment, white elsewhere."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    px = xx.ravel() + 0.5
    py = yy.ravel() + 0.5
    best = np.full(px.size, np.inf)
    for (x0, y0), (x1, y1) in segments:
        dx, dy = x1 - x0, y1 - y0
        length2 = dx * dx + dy * dy
        t = np.clip(((px - x0) * dx + (py - y0) * dy) / length2, 0.0, 1.0) if length2 > 0 else 0.0
        d2 = (px - x0 - t * dx) ** 2 + (py - y0 - t * dy) ** 2
        np.minimum(best, d2, out=best)
    return np.where(best <= half_width * half_width, 0.0, 1.0).reshape(size, size)


def _polyline(points: np.ndarray) -> np.ndarray:
    return np.stack([points[:-1], points[1:]], axis=1)


@lru_cache(maxsize=None)
def infinity_mask(size: int = 200) -> ImageMask:
    """Lemniscate of Bernoulli drawn as a dark stroke on white."""
    t = np.linspace(0.0, 2.0 * math.pi, 721)
    a = 0.42 * size
    denom = 1.0 + np.sin(t) ** 2
    x = size / 2 + a * np.cos(t) / denom
    y = size / 2 - a * np.sin(t) * np.cos(t) / denom
    return ImageMask(_stroke_mask(size, _polyline(np.column_stack([x, y])), 0.035 * size))


@lru_cache(maxsize=None)
def pi_mask(size: int = 200) -> ImageMask:
    """A pi glyph: top bar with a curled left end, a curved left leg and a straight right leg."""
    s = float(size)
    parts = []
    bar = np.array([[0.14, 0.30], [0.20, 0.25], [0.28, 0.24], [0.86, 0.24]]) * s
    parts.append(_polyline(bar))
    tl = np.linspace(0.0, 1.0, 40)
    left = np.column_stack([0.38 - 0.10 * tl**2, 0.24 + 0.58 * tl]) * s
    parts.append(_polyline(left))
    tr = np.linspace(0.0, 1.0, 40)
    right = np.column_stack([0.66 + 0.02 * tr, 0.24 + 0.52 * tr]) * s
    hook = np.array([[0.68, 0.76], [0.72, 0.81], [0.78, 0.80]]) * s
    parts.append(_polyline(np.vstack([right, hook])))
    return ImageMask(_stroke_mask(size, np.concatenate(parts), 0.04 * s))


def pixel_coordinates(mask: ImageMask, flat_index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered coordinates of pixels given by row-major flat indices."""
    j0, i0 = np.divmod(np.asarray(flat_index), mask.width)
    p, q = mask.width, mask.height
    x = ((i0 + 1) - p / 2) / p
    y = -((j0 + 1) - q / 2) / q
    return x, y


@dataclass(frozen=True)
class ImageDraw:
    """Intermediate values of one image-based sample (exposed for checks)."""

    pixels: np.ndarray
    x: np.ndarray
    y: np.ndarray
    sigma: float
    noise: np.ndarray
    theta: np.ndarray
    sample: BivariateSample


def _rotate(x, y, theta):
    c, s = np.cos(theta), np.sin(theta)
    return x * c - y * s, x * s + y * c


def draw_from_image(mask: ImageMask, n: int, sigma_max: float, seed: int) -> ImageDraw:
    """Draw order: ``n`` pixels, ``sigma ~ U(0, sigma_max)``, ``n`` normals, ``n`` angles."""
    if n < 2:
        raise InvalidInputError(f"n must be >= 2, got {n}")
    if not (sigma_max >= 0 and math.isfinite(sigma_max)):
        raise InvalidInputError(f"sigma_max must be finite and >= 0, got {sigma_max}")
    rng = generator(seed)
    probs = mask.probabilities().ravel()
    pixels = rng.choice(probs.size, size=n, p=probs)
    x, y = pixel_coordinates(mask, pixels)
    sigma = float(rng.uniform(0.0, sigma_max))
    noise = sigma * rng.standard_normal(n)
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    z1, z2 = _rotate(x, y + noise, theta)
    return ImageDraw(pixels, x, y, sigma, noise, theta, BivariateSample(z1, z2))


def gen_from_image(mask: ImageMask, n: int, sigma_max: float, seed: int) -> BivariateSample:
    """Sample pixels with probability proportional to darkness, add vertical noise, rotate each point."""
    return draw_from_image(mask, n, sigma_max, seed).sample
