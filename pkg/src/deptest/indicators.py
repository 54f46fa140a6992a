"""Copula versions of thirteen dependence measures.

Every function takes a :class:`~deptest.sample.PseudoSample`. Rank-exact
measures (Spearman, Kendall, Blomqvist, AUK, Hoeffding) are evaluated in
integer arithmetic; the others work on ``u = r/(n+1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .errors import DegenerateInputError, InsufficientSampleError
from .sample import PseudoSample


@dataclass(frozen=True)
class MeasureConfig:
    """Tuning knobs for the estimator-based measures.

    Attributes
    ----------
    mi_neighbors : int
        ``k`` of the Kozachenko-Leonenko entropy estimates.
    mic_grid_cap : int
        Lower bound on the cell budget ``a*b`` of the MIC grid search; the
        budget actually used is ``max(mic_grid_cap, ceil(n**0.6))``.
    ace_max_iter, ace_tol : int, float
        Stopping rule of the ACE alternation.
    rdc_projections, rdc_dim, rdc_sigma : int, int, float
        ``P`` random projections with weights ``N(0, sigma)``; ``d`` is the
        dimension of each margin (always 1 here, kept for the sample-size
        precondition ``n > d*P``).
    rng_seed : int
        Seed of the RDC projections.
    """

    mi_neighbors: int = 3
    mic_grid_cap: int = 4
    ace_max_iter: int = 100
    ace_tol: float = 1e-6
    rdc_projections: int = 10
    rdc_dim: int = 2
    rdc_sigma: float = 0.5
    rng_seed: int = 20240521

    def __post_init__(self):
        for name in ("mi_neighbors", "mic_grid_cap", "ace_max_iter", "rdc_projections", "rdc_dim"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"MeasureConfig.{name} must be positive")
        if not (self.ace_tol > 0 and self.rdc_sigma > 0):
            raise ValueError("MeasureConfig.ace_tol and rdc_sigma must be positive")


DEFAULT_MEASURES = MeasureConfig()


def _require(ps: PseudoSample, n_min: int, name: str) -> int:
    n = ps.n
    if n < n_min:
        raise InsufficientSampleError(f"{name} needs n >= {n_min}, got {n}")
    return n


# --- concordance ------------------------------------------------------------


def spearman(ps: PseudoSample) -> float:
    """Spearman's rho, ``1 - 6 sum d^2 / (n (n^2 - 1))``."""
    n = _require(ps, 2, "spearman")
    d = ps.ranks_u - ps.ranks_v
    s = int(np.dot(d, d))
    return 1.0 - (6 * s) / (n * (n * n - 1))


def _pair_signs(r: np.ndarray) -> np.ndarray:
    return np.sign(r[:, None] - r[None, :])


def kendall(ps: PseudoSample) -> float:
    """Kendall's tau, ``(concordant - discordant) / C(n, 2)``."""
    n = _require(ps, 2, "kendall")
    s = int(np.sum(_pair_signs(ps.ranks_u) * _pair_signs(ps.ranks_v)))  # both orders counted
    return (s // 2) / (n * (n - 1) // 2)


def blomqvist(ps: PseudoSample) -> float:
    """Medial correlation.

    Each point contributes ``sign(r1 - (n+1)/2) * sign(r2 - (n+1)/2)``; points
    lying on an empirical median (odd ``n``) contribute zero.
    """
    n = _require(ps, 2, "blomqvist")
    a = np.sign(2 * ps.ranks_u - (n + 1))
    b = np.sign(2 * ps.ranks_v - (n + 1))
    return int(np.dot(a, b)) / n


def auk(ps: PseudoSample) -> float:
    """Area-under-K-plot indicator.

    Fraction of points with ``r1 r2 < (n+1) #{l: r1_l <= r1_k, r2_l <= r2_k}``.
    """
    n = _require(ps, 2, "auk")
    ru, rv = ps.ranks_u, ps.ranks_v
    below = (ru[None, :] <= ru[:, None]) & (rv[None, :] <= rv[:, None])
    counts = below.sum(axis=1, dtype=np.int64)
    return int(np.count_nonzero(ru * rv < (n + 1) * counts)) / n


def hoeffding_d(ps: PseudoSample) -> float:
    """Hoeffding's D statistic (scaled so that perfect comonotonicity gives 1).

    Evaluated in exact integer arithmetic; the final division is correctly
    rounded.
    """
    n = _require(ps, 5, "hoeffding_d")
    ru, rv = ps.ranks_u, ps.ranks_v
    q = ((ru[None, :] < ru[:, None]) & (rv[None, :] < rv[:, None])).sum(axis=1, dtype=np.int64)
    d1 = int(np.sum(q * (q - 1)))
    d2 = int(np.sum((ru - 1) * (ru - 2) * (rv - 1) * (rv - 2)))
    d3 = int(np.sum((ru - 2) * (rv - 2) * q))
    num = 30 * ((n - 2) * (n - 3) * d1 + d2 - 2 * (n - 2) * d3)
    den = n * (n - 1) * (n - 2) * (n - 3) * (n - 4)
    return num / den


# --- distances and information ------------------------------------------------


def hellinger_b(ps: PseudoSample) -> float:
    """Nearest-neighbour estimate of the Hellinger affinity ``B``.

    ``2 sqrt(n-1) / (n (n+1)) * sum_k min_{l != k} ||r_k - r_l||`` on ranks.
    """
    n = _require(ps, 2, "hellinger")
    du = ps.ranks_u[:, None] - ps.ranks_u[None, :]
    dv = ps.ranks_v[:, None] - ps.ranks_v[None, :]
    d2 = du * du + dv * dv
    np.fill_diagonal(d2, np.iinfo(np.int64).max)
    nearest = d2.min(axis=1)
    # fsum of exact integer square roots keeps the result order-independent
    total = math.fsum(math.sqrt(int(x)) for x in nearest)
    return 2.0 * math.sqrt(n - 1) / (n * (n + 1)) * total


def hellinger(ps: PseudoSample) -> float:
    """Squared-Hellinger feature ``1 - clamp(B, 0, 1)``."""
    b = hellinger_b(ps)
    return 1.0 - min(max(b, 0.0), 1.0)


_LOG_UNIT_BALL = {1: math.log(2.0), 2: math.log(math.pi)}


def _kl_entropy(points: np.ndarray, k: int) -> float:
    n, d = points.shape
    dist, _ = cKDTree(points).query(points, k=k + 1)
    eps = dist[:, k]
    if np.any(eps <= 0):
        raise DegenerateInputError("duplicate points in kNN entropy estimate")
    return float(digamma(n) - digamma(k) + _LOG_UNIT_BALL[d] + d * math.fsum(np.log(eps)) / n)


def mutual_information(ps: PseudoSample, cfg: MeasureConfig = DEFAULT_MEASURES) -> float:
    """Kozachenko-Leonenko estimate ``H(u) + H(v) - H(u, v)`` (nats, unclamped)."""
    k = int(cfg.mi_neighbors)
    _require(ps, k + 1, "linfoot_mi")
    u = ps.u[:, None]
    v = ps.v[:, None]
    return _kl_entropy(u, k) + _kl_entropy(v, k) - _kl_entropy(np.hstack([u, v]), k)


def linfoot(mi: float) -> float:
    """Linfoot's informational correlation ``sqrt(1 - exp(-2 I))`` with ``I`` clamped at 0."""
    mi = max(mi, 0.0)
    return math.sqrt(-math.expm1(-2.0 * mi))


def linfoot_mi(ps: PseudoSample, cfg: MeasureConfig = DEFAULT_MEASURES) -> float:
    return linfoot(mutual_information(ps, cfg))


def mic_grids(n: int, cap: int) -> list[tuple[int, int]]:
    """All ``(a, b)`` with ``a, b >= 2`` and ``a*b <= max(cap, ceil(n**0.6))``."""
    budget = max(int(cap), math.ceil(n**0.6))
    return [(a, b) for a in range(2, budget // 2 + 1) for b in range(2, budget // a + 1)]


def mic(ps: PseudoSample, cfg: MeasureConfig = DEFAULT_MEASURES) -> float:
    """Maximal information coefficient over equispaced grids.

    Point ``k`` falls in column ``floor(r_k a / (n+1))``; the score of a grid
    is its plug-in mutual information divided by ``log min(a, b)``.
    """
    n = _require(ps, 4, "mic")
    best = 0.0
    ru, rv = ps.ranks_u, ps.ranks_v
    for a, b in mic_grids(n, cfg.mic_grid_cap):
        iu = (ru * a) // (n + 1)
        iv = (rv * b) // (n + 1)
        table = np.bincount(iu * b + iv, minlength=a * b).reshape(a, b)
        pu = table.sum(axis=1) / n
        pv = table.sum(axis=0) / n
        pj = table / n
        nz = table > 0
        mi = float(np.sum(pj[nz] * np.log(pj[nz] / np.outer(pu, pv)[nz])))
        best = max(best, mi / math.log(min(a, b)))
    return min(max(best, 0.0), 1.0)


# --- maximal correlation --------------------------------------------------------


def _standardize(x: np.ndarray) -> np.ndarray | None:
    x = x - x.mean()
    s = math.sqrt(float(np.dot(x, x)) / x.size)
    if s <= 1e-12:
        return None
    return x / s


def _running_mean(y_sorted: np.ndarray, k: int) -> np.ndarray:
    """Mean of the ``k`` rank-nearest values, window centered and clipped to the ends."""
    n = y_sorted.size
    csum = np.concatenate([[0.0], np.cumsum(y_sorted)])
    start = np.clip(np.arange(n) - (k - 1) // 2, 0, n - k)
    return (csum[start + k] - csum[start]) / k


def _smooth(y: np.ndarray, order: np.ndarray, k: int) -> np.ndarray:
    out = np.empty_like(y)
    out[order] = _running_mean(y[order], k)
    return out


def ace_maxcor(ps: PseudoSample, cfg: MeasureConfig = DEFAULT_MEASURES) -> float:
    """Maximal correlation by alternating conditional expectations.

    Conditional means are ``k``-nearest-neighbour running means in rank order
    with ``k = ceil(n**0.8 / 4)``. Both transforms are re-standardized after
    every smoothing step.
    """
    n = _require(ps, 10, "ace_maxcor")
    k = min(n, max(1, math.ceil(n**0.8 / 4)))
    order_u = np.argsort(ps.ranks_u)
    order_v = np.argsort(ps.ranks_v)
    theta = _standardize(ps.v.copy())
    prev = -1.0
    rho = 0.0
    for _ in range(int(cfg.ace_max_iter)):
        phi = _standardize(_smooth(theta, order_u, k))
        if phi is None:
            return 0.0
        theta_new = _standardize(_smooth(phi, order_v, k))
        if theta_new is None:
            return 0.0
        theta = theta_new
        rho = abs(float(np.dot(theta, phi)) / n)
        if abs(rho - prev) < cfg.ace_tol:
            break
        prev = rho
    return min(rho, 1.0)


def _orthonormal_basis(m: np.ndarray, rtol: float = 1e-7) -> np.ndarray:
    m = m - m.mean(axis=0)
    uu, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] <= 0:
        return uu[:, :0]
    return uu[:, s > rtol * s[0]]


def rdc_features(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    proj = x[:, None] * w[None, :] + b[None, :]
    return np.hstack([np.sin(proj), np.cos(proj)])


def rdc(ps: PseudoSample, cfg: MeasureConfig = DEFAULT_MEASURES) -> float:
    """Randomized dependence coefficient.

    Random sin/cos features of ``u`` and ``v`` (independent weights per
    margin), followed by the largest canonical correlation between the two
    feature blocks. Directions with singular value below ``1e-7`` times the
    largest are dropped before the CCA.
    """
    n = ps.n
    if n <= cfg.rdc_dim * cfg.rdc_projections:
        raise InsufficientSampleError(
            f"rdc needs n > {cfg.rdc_dim * cfg.rdc_projections}, got {n}"
        )
    rng = np.random.Generator(np.random.PCG64(int(cfg.rng_seed) & ((1 << 64) - 1)))
    p = int(cfg.rdc_projections)
    w1 = rng.normal(0.0, cfg.rdc_sigma, p)
    b1 = rng.uniform(-math.pi, math.pi, p)
    w2 = rng.normal(0.0, cfg.rdc_sigma, p)
    b2 = rng.uniform(-math.pi, math.pi, p)
    q1 = _orthonormal_basis(rdc_features(ps.u, w1, b1))
    q2 = _orthonormal_basis(rdc_features(ps.v, w2, b2))
    if q1.shape[1] == 0 or q2.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(q1.T @ q2, compute_uv=False)
    return float(min(max(s[0], 0.0), 1.0))


# --- matrix-based measures ------------------------------------------------------


def double_centered_distances(x: np.ndarray) -> np.ndarray:
    d = np.abs(x[:, None] - x[None, :])
    row = d.mean(axis=1)
    return d - row[:, None] - row[None, :] + row.mean()


def copula_dcor(ps: PseudoSample) -> float:
    """Empirical distance correlation of the pseudo-observations."""
    _require(ps, 2, "copula_dcor")
    a = double_centered_distances(ps.u)
    b = double_centered_distances(ps.v)
    v11 = float(np.mean(a * a))
    v22 = float(np.mean(b * b))
    if v11 <= 0 or v22 <= 0:
        raise DegenerateInputError("zero distance variance in a margin")
    v12 = max(float(np.mean(a * b)), 0.0)
    return min(math.sqrt(v12) / math.sqrt(math.sqrt(v11) * math.sqrt(v22)), 1.0)


def _mdc_directed(x: np.ndarray, y: np.ndarray) -> float:
    """MDC(y | x) = sqrt(MDD^2) / (sd(y) * sqrt(dCov(x, x)))."""
    a = double_centered_distances(x)
    yc = y - y.mean()
    mdd2 = max(-float(np.mean(a * np.outer(yc, yc))), 0.0)
    sy = math.sqrt(float(np.dot(yc, yc)) / y.size)
    dvar = math.sqrt(float(np.mean(a * a)))
    if sy <= 0 or dvar <= 0:
        raise DegenerateInputError("zero dispersion in a margin")
    return min(math.sqrt(mdd2) / (sy * math.sqrt(dvar)), 1.0)


def copula_mdc(ps: PseudoSample) -> float:
    """Symmetrized martingale difference correlation ``(MDC(v|u) + MDC(u|v)) / 2``."""
    _require(ps, 2, "copula_mdc")
    return 0.5 * (_mdc_directed(ps.u, ps.v) + _mdc_directed(ps.v, ps.u))


def median_bandwidth(x: np.ndarray) -> float:
    """``sqrt(median_{k<l} (x_k - x_l)^2 / 2)``."""
    iu = np.triu_indices(x.size, k=1)
    d2 = (x[:, None] - x[None, :])[iu] ** 2
    return math.sqrt(0.5 * float(np.median(d2)))


def _gaussian_gram(x: np.ndarray) -> np.ndarray:
    sigma = median_bandwidth(x)
    if sigma <= 0:
        raise DegenerateInputError("median pairwise distance is zero")
    d2 = (x[:, None] - x[None, :]) ** 2
    return np.exp(-d2 / (2.0 * sigma * sigma)) / math.sqrt(2.0 * math.pi)


def copula_hsic(ps: PseudoSample) -> float:
    """``trace(K1 H K2 H) / (n - 1)^2`` with median-heuristic Gaussian kernels."""
    n = _require(ps, 2, "copula_hsic")
    k1 = _gaussian_gram(ps.u)
    k2 = _gaussian_gram(ps.v)
    r1 = k1.mean(axis=1)
    k1c = k1 - r1[:, None] - r1[None, :] + r1.mean()
    return max(float(np.sum(k1c * k2)) / (n - 1) ** 2, 0.0)


MEASURES = (
    ("spearman", spearman),
    ("kendall", kendall),
    ("blomqvist", blomqvist),
    ("auk", auk),
    ("hoeffding", hoeffding_d),
    ("hellinger", hellinger),
    ("linfoot_mi", linfoot_mi),
    ("mic", mic),
    ("ace", ace_maxcor),
    ("rdc", rdc),
    ("dcor", copula_dcor),
    ("mdc", copula_mdc),
    ("hsic", copula_hsic),
)

_NEEDS_CFG = {"linfoot_mi", "mic", "ace", "rdc"}


def all_measures(ps: PseudoSample, cfg: MeasureConfig = DEFAULT_MEASURES) -> np.ndarray:
    """The thirteen measures in feature order."""
    out = np.empty(len(MEASURES))
    for i, (name, fn) in enumerate(MEASURES):
        out[i] = fn(ps, cfg) if name in _NEEDS_CFG else fn(ps)
    return out
