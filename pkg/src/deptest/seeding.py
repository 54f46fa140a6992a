"""Seed derivation.

Every random stream in the package is a child of a user-provided base seed.
A child seed is the first 8 bytes (little endian) of
``blake2b(f"{base}/{path}")`` where ``base`` is reduced to an unsigned 64-bit
integer and ``path`` is a stable string such as ``"null/100/17"``. Streams are
``numpy.random.Generator(PCG64(child_seed))``.

Because the child seed depends only on ``(base, path)`` and not on how many
other streams were created before it, any amount of parallel work can be
scheduled in any order and still produce identical results.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def as_seed(value) -> int:
    """Normalize an integer-like seed to an unsigned 64-bit integer."""
    try:
        ivalue = int(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"seed must be an integer, got {value!r}") from exc
    return ivalue & MASK64


def derive_seed(base: int, path: str) -> int:
    """Return the 64-bit child seed for ``path`` under ``base``."""
    digest = hashlib.blake2b(f"{as_seed(base)}/{path}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator seeded directly with ``seed``."""
    return np.random.Generator(np.random.PCG64(as_seed(seed)))


def child_rng(base: int, path: str) -> np.random.Generator:
    """Generator for the child stream ``path`` of ``base``."""
    return generator(derive_seed(base, path))
