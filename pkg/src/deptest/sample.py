"""Bivariate samples and their rank (pseudo-observation) representation.

Everything downstream of :func:`to_pseudo` only sees ranks, which is what
makes the features invariant under strictly increasing marginal transforms.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


class TiesWarning(UserWarning):
    """Emitted when ties were broken by input order during ranking."""


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InvalidInputError(f"{name}[{bad}] is not finite ({arr[bad]!r})")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BivariateSample:
    """``n`` observed pairs ``(z1[k], z2[k])``.

    Arrays are copied to float64 and made read-only on construction.
    """

    z1: np.ndarray
    z2: np.ndarray

    def __post_init__(self):
        z1 = _frozen(self.z1, "z1")
        z2 = _frozen(self.z2, "z2")
        if z1.shape != z2.shape:
            raise InvalidInputError(f"z1 and z2 differ in length ({z1.size} vs {z2.size})")
        if z1.size < 2:
            raise InvalidInputError(f"a sample needs at least 2 pairs, got {z1.size}")
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)

    @property
    def n(self) -> int:
        return int(self.z1.size)

    def __eq__(self, other):
        if not isinstance(other, BivariateSample):
            return NotImplemented
        return np.array_equal(self.z1, other.z1) and np.array_equal(self.z2, other.z2)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PseudoSample:
    """Rank representation ``u = ranks_u / (n + 1)``, ``v = ranks_v / (n + 1)``.

    ``ties`` records whether either coordinate needed ordinal tie-breaking.
    """

    ranks_u: np.ndarray
    ranks_v: np.ndarray
    ties: bool = False
    u: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self):
        ru = np.array(self.ranks_u, dtype=np.int64, copy=True)
        rv = np.array(self.ranks_v, dtype=np.int64, copy=True)
        if ru.ndim != 1 or ru.shape != rv.shape:
            raise InvalidInputError("rank vectors must be one-dimensional and of equal length")
        n = ru.size
        if n < 2:
            raise InvalidInputError(f"a sample needs at least 2 pairs, got {n}")
        expected = np.arange(1, n + 1)
        if not (np.array_equal(np.sort(ru), expected) and np.array_equal(np.sort(rv), expected)):
            raise InvalidInputError("rank vectors must be permutations of 1..n")
        for arr in (ru, rv):
            arr.setflags(write=False)
        u = ru / (n + 1.0)
        v = rv / (n + 1.0)
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "ranks_u", ru)
        object.__setattr__(self, "ranks_v", rv)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return int(self.ranks_u.size)

    def swapped(self) -> "PseudoSample":
        """The same sample with the two coordinates exchanged."""
        return PseudoSample(self.ranks_v, self.ranks_u, self.ties)

    def __eq__(self, other):
        if not isinstance(other, PseudoSample):
            return NotImplemented
        return np.array_equal(self.ranks_u, other.ranks_u) and np.array_equal(
            self.ranks_v, other.ranks_v
        )

    __hash__ = None


def _ranks_with_ties(values) -> tuple[np.ndarray, bool]:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("ranks() expects a one-dimensional vector")
    if x.size < 2:
        raise InvalidInputError(f"ranks() needs at least 2 values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("ranks() received a non-finite value")
    order = np.argsort(x, kind="stable")
    r = np.empty(x.size, dtype=np.int64)
    r[order] = np.arange(1, x.size + 1)
    sx = x[order]
    ties = bool(np.any(sx[1:] == sx[:-1]))
    return r, ties


def ranks(values) -> np.ndarray:
    """Ordinal ranks ``1..n``; equal values are ranked in input order.

    Examples
    --------
    >>> ranks([3.0, 1.0, 2.0]).tolist()
    [3, 1, 2]
    >>> ranks([5.0, 5.0]).tolist()
    [1, 2]
    """
    return _ranks_with_ties(values)[0]


def to_pseudo(sample: BivariateSample, warn: bool = True) -> PseudoSample:
    """Pseudo-observations of ``sample``.

    Ties are broken by input order so the result stays deterministic; the
    returned ``ties`` flag is set and a :class:`TiesWarning` is issued when
    ``warn`` is true.
    """
    ru, t1 = _ranks_with_ties(sample.z1)
    rv, t2 = _ranks_with_ties(sample.z2)
    ties = t1 or t2
    if ties and warn:
        warnings.warn("ties broken by input order", TiesWarning, stacklevel=2)
    return PseudoSample(ru, rv, ties)


def pseudo_from_ranks(ranks_u, ranks_v) -> PseudoSample:
    """Build a :class:`PseudoSample` directly from two rank permutations."""
    return PseudoSample(np.asarray(ranks_u), np.asarray(ranks_v))


# --- CSV persistence -------------------------------------------------------


def _parse_float(token: str, path: str, lineno: int, col: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InvalidInputError(
            f"{path}:{lineno}: column {col} is not a number ({token.strip()!r})"
        ) from None
    if not math.isfinite(value):
        raise InvalidInputError(f"{path}:{lineno}: column {col} is not finite ({token.strip()!r})")
    return value


def parse_sample_csv(text: str, source: str = "<string>") -> BivariateSample:
    """Parse two comma-separated numeric columns with an optional header row.

    Blank lines are skipped. Any other malformed line raises
    :class:`InvalidInputError` naming ``source`` and the 1-based line number.
    """
    z1: list[float] = []
    z2: list[float] = []
    reader = csv.reader(io.StringIO(text))
    first_data = True
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise InvalidInputError(f"{source}:{lineno}: expected 2 columns, found {len(row)}")
        if first_data:
            first_data = False
            try:
                float(row[0]), float(row[1])
            except ValueError:
                continue  # header
        z1.append(_parse_float(row[0], source, lineno, 1))
        z2.append(_parse_float(row[1], source, lineno, 2))
    if len(z1) < 2:
        raise InvalidInputError(f"{source}: need at least 2 data rows, found {len(z1)}")
    return BivariateSample(np.array(z1), np.array(z2))


def read_sample_csv(path) -> BivariateSample:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_sample_csv(text, str(path))


def format_sample_csv(sample: BivariateSample) -> str:
    """CSV text with a ``z1,z2`` header; floats use ``repr`` so they round-trip."""
    lines = ["z1,z2"]
    lines.extend(f"{a!r},{b!r}" for a, b in zip(sample.z1.tolist(), sample.z2.tolist()))
    return "\n".join(lines) + "\n"


def write_sample_csv(sample: BivariateSample, path) -> None:
    Path(path).write_text(format_sample_csv(sample), encoding="utf-8")
