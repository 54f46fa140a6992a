"""HHG and DDR rank tests with permutation p-values.

Both statistics are computed in x-rank order: ``p[i]`` is the (0-based)
v-rank of the observation whose u-rank is ``i``. A permutation of the null
shuffles ``p``, i.e. re-pairs the v-ranks, so the results depend only on the
rank pairing pattern and not on the order of the input rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .errors import InsufficientSampleError, InvalidInputError
from .sample import PseudoSample
from .seeding import child_rng


@dataclass(frozen=True)
class PermConfig:
    n_permutations: int = 100
    rng_seed: int = 20240522
    ddr_dn: int = 10

    def __post_init__(self):
        if int(self.n_permutations) < 1:
            raise ValueError("PermConfig.n_permutations must be >= 1")
        if int(self.ddr_dn) < 1:
            raise ValueError("PermConfig.ddr_dn must be >= 1")


DEFAULT_PERM = PermConfig()


@dataclass(frozen=True)
class HhgStatistics:
    chi2_sum: float
    lik_sum: float
    chi2_max: float
    lik_max: float

    def as_array(self) -> np.ndarray:
        return np.array([self.chi2_sum, self.lik_sum, self.chi2_max, self.lik_max])


@dataclass(frozen=True)
class DdrStatistics:
    t_s2: float
    t_v: float


def pairing(ps: PseudoSample) -> np.ndarray:
    """0-based v-rank indexed by 0-based u-rank."""
    p = np.empty(ps.n, dtype=np.int64)
    p[ps.ranks_u - 1] = ps.ranks_v - 1
    return p


# --- HHG --------------------------------------------------------------------


@numba.njit(cache=True)
def _hhg_one(p, logs):
    n = p.shape[0]
    m = n - 2
    log_m = logs[m]
    tree = np.zeros(n + 1, dtype=np.int64)
    dom = np.zeros(n, dtype=np.int64)
    chi_sum = 0.0
    lik_sum = 0.0
    chi_max = 0.0
    lik_max = 0.0
    for a in range(n):
        b = p[a]
        tree[:] = 0
        # Points are added in order of x-distance from a; all points at the same
        # x-distance are added before any of them is queried, so dom[l] counts
        # every m (including a and l) with dx_m <= dx_l and dy_m <= dy_l.
        for d in range(n):
            lo = a - d
            hi = a + d
            has_lo = lo >= 0
            has_hi = d > 0 and hi < n
            if not has_lo and not has_hi:
                break
            if has_lo:
                i = abs(p[lo] - b) + 1
                while i <= n:
                    tree[i] += 1
                    i += i & (-i)
            if has_hi:
                i = abs(p[hi] - b) + 1
                while i <= n:
                    tree[i] += 1
                    i += i & (-i)
            if has_lo:
                s = 0
                i = abs(p[lo] - b) + 1
                while i > 0:
                    s += tree[i]
                    i -= i & (-i)
                dom[lo] = s
            if has_hi:
                s = 0
                i = abs(p[hi] - b) + 1
                while i > 0:
                    s += tree[i]
                    i -= i & (-i)
                dom[hi] = s
        for l in range(n):
            if l == a:
                continue
            dx = abs(l - a)
            dy = abs(p[l] - b)
            cx = min(n - 1, a + dx) - max(0, a - dx) + 1
            cy = min(n - 1, b + dy) - max(0, b - dy) + 1
            a00 = dom[l] - 2
            r0 = cx - 2
            c0 = cy - 2
            r1 = m - r0
            c1 = m - c0
            if r0 == 0 or r1 == 0 or c0 == 0 or c1 == 0:
                continue
            a01 = r0 - a00
            a10 = c0 - a00
            a11 = m - a00 - a01 - a10
            det = float(a00 * a11 - a01 * a10)
            s_chi = m * det * det / (float(r0) * float(r1) * float(c0) * float(c1))
            g = 0.0
            if a00 > 0:
                g += a00 * (logs[a00] + log_m - logs[r0] - logs[c0])
            if a01 > 0:
                g += a01 * (logs[a01] + log_m - logs[r0] - logs[c1])
            if a10 > 0:
                g += a10 * (logs[a10] + log_m - logs[r1] - logs[c0])
            if a11 > 0:
                g += a11 * (logs[a11] + log_m - logs[r1] - logs[c1])
            g = 2.0 * g
            if g < 0.0:
                g = 0.0
            chi_sum += s_chi
            lik_sum += g
            if s_chi > chi_max:
                chi_max = s_chi
            if g > lik_max:
                lik_max = g
    return chi_sum, lik_sum, chi_max, lik_max


@numba.njit(cache=True)
def _hhg_batch(p, perms, logs):
    m = perms.shape[0]
    out = np.empty((m + 1, 4))
    r = _hhg_one(p, logs)
    out[0, 0] = r[0]
    out[0, 1] = r[1]
    out[0, 2] = r[2]
    out[0, 3] = r[3]
    q = np.empty_like(p)
    for j in range(m):
        for i in range(p.shape[0]):
            q[i] = p[perms[j, i]]
        r = _hhg_one(q, logs)
        out[j + 1, 0] = r[0]
        out[j + 1, 1] = r[1]
        out[j + 1, 2] = r[2]
        out[j + 1, 3] = r[3]
    return out


def _log_table(n: int) -> np.ndarray:
    logs = np.zeros(n + 1)
    logs[1:] = np.log(np.arange(1, n + 1, dtype=np.float64))
    return logs


def _hhg_array(p: np.ndarray, perms: np.ndarray) -> np.ndarray:
    n = p.size
    if n < 3:
        raise InsufficientSampleError(f"HHG needs n >= 3, got {n}")
    return _hhg_batch(p.astype(np.int64), perms.astype(np.int64), _log_table(n))


def hhg_statistics(ps: PseudoSample) -> HhgStatistics:
    """Sum and max of the per-pair chi-square and G statistics over ordered pairs.

    Tables with an empty margin contribute 0 to both statistics.
    """
    out = _hhg_array(pairing(ps), np.empty((0, ps.n), dtype=np.int64))
    return HhgStatistics(*map(float, out[0]))


# --- DDR --------------------------------------------------------------------


def legendre_orthonormal(x: np.ndarray, qmax: int) -> np.ndarray:
    """Shifted orthonormal Legendre polynomials ``L_1..L_qmax`` on [0, 1].

    Returns an array of shape ``(len(x), qmax)``. Uses the three-term
    recurrence of the standard polynomials at ``t = 2x - 1`` and rescales by
    ``sqrt(2q + 1)``.
    """
    t = 2.0 * np.asarray(x, dtype=np.float64) - 1.0
    out = np.empty((t.size, qmax))
    prev = np.ones_like(t)
    cur = t.copy()
    for q in range(1, qmax + 1):
        if q > 1:
            prev, cur = cur, ((2 * q - 1) * t * cur - (q - 1) * prev) / q
        out[:, q - 1] = math.sqrt(2 * q + 1) * cur
    return out


def ddr_dimension(n: int, cap: int = 10) -> int:
    """``d(n) = min(cap, ceil(sqrt(n)))``."""
    return min(int(cap), math.isqrt(n - 1) + 1 if n > 1 else 1)


def select_s2(t_cumulative: np.ndarray, n: float) -> int:
    """Smallest ``Q`` (1-based) maximizing ``T_Q - Q log n``."""
    t = np.asarray(t_cumulative, dtype=np.float64)
    crit = t - np.arange(1, t.size + 1) * math.log(n)
    return int(np.flatnonzero(crit == crit.max())[0]) + 1


def select_lambda(components: np.ndarray, n: float) -> tuple[float, int]:
    """Greedy prefix search for the Lambda criterion.

    ``components[i, j]`` holds the squared normalized cross moment of
    ``L_{i+1}`` and ``L_{j+1}``. The (1, 1) term is always included; the others
    are ranked by value (ties by ``(i, j)``) and the prefix maximizing
    ``T_Lambda - |Lambda| log n`` is kept. Returns ``(T_Lambda, |Lambda|)``.
    """
    c = np.asarray(components, dtype=np.float64)
    d = c.shape[0]
    rest = [(-c[i, j], i, j) for i in range(d) for j in range(d) if (i, j) != (0, 0)]
    rest.sort()
    log_n = math.log(n)
    total = float(c[0, 0])
    best_val, best_t, best_size = total - log_n, total, 1
    for size, (neg, _, _) in enumerate(rest, start=2):
        total += -neg
        val = total - size * log_n
        if val > best_val:
            best_val, best_t, best_size = val, total, size
    return best_t, best_size


def _ddr_components(p: np.ndarray, perms: np.ndarray, dn: int) -> np.ndarray:
    """Squared cross moments for the observed pairing and each permutation.

    Shape ``(M + 1, dn, dn)``; entry 0 is the observed sample.
    """
    n = p.size
    grid = (np.arange(1, n + 1) - 0.5) / n
    leg = legendre_orthonormal(grid, dn)  # row i: polynomial values at rank i+1
    pairs = np.vstack([p[None, :], p[perms]]) if perms.size else p[None, :]
    lv = leg[pairs]  # (M+1, n, dn)
    c = np.einsum("iq,mir->mqr", leg, lv) / math.sqrt(n)
    return c * c


def _ddr_batch(comp: np.ndarray, n: int) -> np.ndarray:
    """Vectorized ``(t_s2, t_v)`` for a stack of component matrices.

    Same selection rules as :func:`select_s2` and :func:`select_lambda`; the
    order among tied components does not change prefix sums, so a plain
    descending sort is equivalent to the documented tie-break.
    """
    m, d, _ = comp.shape
    log_n = math.log(n)
    diag_cum = np.cumsum(np.diagonal(comp, axis1=1, axis2=2), axis=1)
    q = np.argmax(diag_cum - np.arange(1, d + 1) * log_n, axis=1)
    t_s2 = diag_cum[np.arange(m), q]
    flat = comp.reshape(m, d * d)
    rest = -np.sort(-flat[:, 1:], axis=1)
    cum = flat[:, :1] + np.concatenate([np.zeros((m, 1)), np.cumsum(rest, axis=1)], axis=1)
    best = np.argmax(cum - np.arange(1, d * d + 1) * log_n, axis=1)
    t_v = cum[np.arange(m), best]
    return np.column_stack([t_s2, t_v])


def ddr_statistics(ps: PseudoSample, cfg: PermConfig = DEFAULT_PERM) -> DdrStatistics:
    """Data-driven rank statistics (Schwarz-selected ``T_S2`` and Lambda-criterion ``T_V``)."""
    n = ps.n
    if n < 5:
        raise InsufficientSampleError(f"DDR needs n >= 5, got {n}")
    comp = _ddr_components(pairing(ps), np.empty((0, n), dtype=np.int64), ddr_dimension(n, cfg.ddr_dn))
    t_s2, t_v = _ddr_batch(comp, n)[0]
    return DdrStatistics(float(t_s2), float(t_v))


def ddr_t(ps: PseudoSample, qmax: int) -> np.ndarray:
    """Cumulative ``T_1..T_qmax`` (exposed for checks)."""
    comp = _ddr_components(pairing(ps), np.empty((0, ps.n), dtype=np.int64), qmax)[0]
    return np.cumsum(np.diagonal(comp))


# --- permutation p-values -----------------------------------------------------

PERM_STATISTICS = ("hhg_chi2_sum", "hhg_lik_sum", "hhg_chi2_max", "hhg_lik_max", "ddr_v", "ddr_s2")


@lru_cache(maxsize=32)
def _permutations(seed: int, n: int, m: int) -> np.ndarray:
    perms = np.empty((m, n), dtype=np.int64)
    for i in range(m):
        perms[i] = child_rng(seed, f"perm/{i}").permutation(n)
    perms.setflags(write=False)
    return perms


def permutation_matrix(cfg: PermConfig, n: int) -> np.ndarray:
    """The ``M x n`` permutations used for every sample of size ``n`` under ``cfg``.

    Row ``i`` comes from the child stream ``perm/i`` of ``cfg.rng_seed``.
    """
    return _permutations(int(cfg.rng_seed), int(n), int(cfg.n_permutations))


def _pvalue(observed: float, permuted: np.ndarray) -> float:
    return (1 + int(np.count_nonzero(permuted >= observed))) / (permuted.size + 1)


def all_pvalues(ps: PseudoSample, cfg: PermConfig = DEFAULT_PERM) -> dict[str, float]:
    """Permutation p-values of the six statistics, sharing one set of permutations."""
    n = ps.n
    if n < 5:
        raise InsufficientSampleError(f"permutation tests need n >= 5, got {n}")
    p = pairing(ps)
    perms = permutation_matrix(cfg, n)
    hhg = _hhg_array(p, perms)
    comp = _ddr_components(p, perms, ddr_dimension(n, cfg.ddr_dn))
    ddr = _ddr_batch(comp, n)  # columns: t_s2, t_v
    out = {}
    for j, name in enumerate(PERM_STATISTICS[:4]):
        out[name] = _pvalue(hhg[0, j], hhg[1:, j])
    out["ddr_v"] = _pvalue(ddr[0, 1], ddr[1:, 1])
    out["ddr_s2"] = _pvalue(ddr[0, 0], ddr[1:, 0])
    return out


def perm_pvalue(ps: PseudoSample, statistic: str, cfg: PermConfig = DEFAULT_PERM) -> float:
    """Permutation p-value ``(1 + #{T_perm >= T_obs}) / (M + 1)`` for one statistic."""
    if statistic not in PERM_STATISTICS:
        raise InvalidInputError(f"unknown permutation statistic {statistic!r}")
    return all_pvalues(ps, cfg)[statistic]
