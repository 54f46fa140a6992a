"""Brute-force reference implementations used as test oracles.

Each oracle follows a different computational route from the library code
(explicit loops, U-statistic kernels, uncentred distance identities), so an
agreement is evidence that both are right rather than that both share a bug.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def hoeffding_ustat(ru, rv) -> float:
    """30 times the order-5 U-statistic with Hoeffding's kernel, in exact arithmetic."""
    x = np.asarray(ru, dtype=np.int64)
    y = np.asarray(rv, dtype=np.int64)
    n = x.size
    idx = np.array(list(itertools.permutations(range(n), 5)), dtype=np.int16)
    i1, i2, i3, i4, i5 = (idx[:, k] for k in range(5))

    def psi(a, b, c):
        return (b <= a).astype(np.int64) - (c <= a).astype(np.int64)

    prod = psi(x[i1], x[i2], x[i3]) * psi(x[i1], x[i4], x[i5]) * psi(y[i1], y[i2], y[i3]) * psi(y[i1], y[i4], y[i5])
    total = int(prod.sum())  # equals 4 * sum of kernel values
    return float(Fraction(30 * total, 4 * len(idx)))


def auk_loops(ru, rv) -> float:
    n = len(ru)
    hits = 0
    for k in range(n):
        h = sum(1 for l in range(n) if ru[l] <= ru[k] and rv[l] <= rv[k])
        if ru[k] * rv[k] < (n + 1) * h:
            hits += 1
    return Fraction(hits, n).__float__()


def hellinger_b_loops(ru, rv) -> float:
    n = len(ru)
    total = 0.0
    for k in range(n):
        best = math.inf
        for l in range(n):
            if l != k:
                best = min(best, math.hypot(ru[k] - ru[l], rv[k] - rv[l]))
        total += best
    return 2.0 * math.sqrt(n - 1) / (n * (n + 1)) * total


def hellinger_loops(ru, rv) -> float:
    return 1.0 - min(max(hellinger_b_loops(ru, rv), 0.0), 1.0)


def _dcov2_uncentred(x, y) -> float:
    """``S1 + S2 - 2 S3`` form of the squared distance covariance."""
    a = np.abs(np.subtract.outer(x, x))
    b = np.abs(np.subtract.outer(y, y))
    s1 = float(np.mean(a * b))
    s2 = float(np.mean(a)) * float(np.mean(b))
    s3 = float(np.mean(a.mean(axis=1) * b.mean(axis=1)))
    return s1 + s2 - 2.0 * s3


def dcor_uncentred(u, v) -> float:
    v12 = max(_dcov2_uncentred(u, v), 0.0)
    v11 = _dcov2_uncentred(u, u)
    v22 = _dcov2_uncentred(v, v)
    return min(math.sqrt(v12 / math.sqrt(v11 * v22)), 1.0)


def _mdc_loops(x, y) -> float:
    n = len(x)
    ybar = sum(y) / n
    mdd2 = 0.0
    for k in range(n):
        for l in range(n):
            mdd2 -= abs(x[k] - x[l]) * (y[k] - ybar) * (y[l] - ybar)
    mdd2 = max(mdd2 / (n * n), 0.0)
    sy = math.sqrt(sum((t - ybar) ** 2 for t in y) / n)
    dvar = math.sqrt(_dcov2_uncentred(np.asarray(x), np.asarray(x)))
    return min(math.sqrt(mdd2) / (sy * math.sqrt(dvar)), 1.0)


def mdc_loops(u, v) -> float:
    return 0.5 * (_mdc_loops(list(v), list(u)) + _mdc_loops(list(u), list(v)))


def hsic_matrix(u, v) -> float:
    """``trace(K1 H K2 H) / (n-1)^2`` with an explicit centring matrix."""
    n = len(u)

    def gram(x):
        d2 = sorted((x[k] - x[l]) ** 2 for k in range(n) for l in range(k + 1, n))
        m = len(d2)
        med = d2[m // 2] if m % 2 else 0.5 * (d2[m // 2 - 1] + d2[m // 2])
        s2 = 0.5 * med
        return np.exp(-np.subtract.outer(x, x) ** 2 / (2.0 * s2)) / math.sqrt(2.0 * math.pi)

    h = np.eye(n) - np.ones((n, n)) / n
    k1 = gram(np.asarray(u))
    k2 = gram(np.asarray(v))
    return max(float(np.trace(k1 @ h @ k2 @ h)) / (n - 1) ** 2, 0.0)


def hhg_loops(ru, rv) -> tuple[float, float, float, float]:
    """Sum and max of Pearson chi-square and G statistics over ordered pairs (i, j)."""
    n = len(ru)
    m = n - 2
    chi_sum = lik_sum = chi_max = lik_max = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rx = abs(ru[i] - ru[j])
            ry = abs(rv[i] - rv[j])
            t = [[0, 0], [0, 0]]
            for k in range(n):
                if k in (i, j):
                    continue
                a = 0 if abs(ru[i] - ru[k]) <= rx else 1
                b = 0 if abs(rv[i] - rv[k]) <= ry else 1
                t[a][b] += 1
            rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]]
            cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]]
            if min(rows) == 0 or min(cols) == 0:
                continue
            chi = 0.0
            g = 0.0
            for a in range(2):
                for b in range(2):
                    e = rows[a] * cols[b] / m
                    chi += (t[a][b] - e) ** 2 / e
                    if t[a][b] > 0:
                        g += t[a][b] * math.log(t[a][b] / e)
            g = max(2.0 * g, 0.0)
            chi_sum += chi
            lik_sum += g
            chi_max = max(chi_max, chi)
            lik_max = max(lik_max, g)
    return chi_sum, lik_sum, chi_max, lik_max


def spearman_pearson(ru, rv) -> float:
    """Pearson correlation of the ranks."""
    return float(np.corrcoef(np.asarray(ru, float), np.asarray(rv, float))[0, 1])


def kendall_loops(ru, rv) -> float:
    n = len(ru)
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            s += int(np.sign(ru[i] - ru[j]) * np.sign(rv[i] - rv[j]))
    return s / (n * (n - 1) / 2)


def conv_loops(x, w, b):
    """Same-padded 3x3 convolution by direct summation; x (N,H,W,C), w (3,3,C,F)."""
    n, h, wd, c = x.shape
    f = w.shape[3]
    out = np.zeros((n, h, wd, f))
    for s in range(n):
        for i in range(h):
            for j in range(wd):
                for di in range(3):
                    for dj in range(3):
                        ii, jj = i + di - 1, j + dj - 1
                        if 0 <= ii < h and 0 <= jj < wd:
                            out[s, i, j] += x[s, ii, jj] @ w[di, dj]
                out[s, i, j] += b
    return out


def auc_pairs(scores, labels) -> float:
    """AUC as the fraction of positive/negative pairs ordered correctly, ties counting 1/2."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = Fraction(0)
    for p in pos:
        for q in neg:
            total += 1 if p > q else Fraction(1, 2) if p == q else 0
    return float(total / (len(pos) * len(neg)))


def critical_value_scan(scores, alpha) -> float:
    """Linear scan over candidate thresholds in increasing order."""
    s = sorted(float(x) for x in scores)
    n = len(s)
    for d in s:
        if sum(1 for x in s if x > d) <= alpha * n:
            return d
    raise AssertionError("unreachable: the maximum always qualifies")
