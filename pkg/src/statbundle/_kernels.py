"""Numeric kernels backing the library's inner loops.

Every kernel exists twice: a plain-numpy reference implementation
(``*_numpy``) and a numba ``@njit`` loop version compiled lazily on first
call.  The numba path is the default whenever numba imports cleanly; set
``STATBUNDLE_NO_NUMBA=1`` in the environment to select the numpy path.
Both paths compute the same quantities and agree to the last couple of
float bits (only the summation order differs).

``benchmarks/bench_kernels.py`` times the two paths head to head.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_disabled() -> bool:
    flag = os.environ.get("STATBUNDLE_NO_NUMBA", "")
    return flag.strip().lower() in {"1", "true", "yes", "on"}


try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the install
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and not _numba_disabled()


def backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------


def dot3_numpy(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """sum(a * b * c) over 1-d arrays (weighted expectation core)."""
    return float(np.sum(a * b * c))


def dot4_numpy(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> float:
    """sum(a * b * c * d) over 1-d arrays (covariance pairing core)."""
    return float(np.sum(a * b * c * d))


def log_mean_exp_numpy(u: np.ndarray, w: np.ndarray) -> float:
    """log(sum(w * exp(u)) / sum(w)) with max-shift stabilization.

    ``w`` must be positive.  Dividing by sum(w) pins the value at 0 for
    constant-zero ``u`` even when the weights only sum to 1 up to float
    round-off.
    """
    m = float(np.max(u))
    s = float(np.sum(w * np.exp(u - m)))
    return m + np.log(s) - np.log(float(np.sum(w)))


def kl_sum_numpy(q: np.ndarray, r: np.ndarray, w: np.ndarray) -> float:
    """sum(w * q * log(q / r)) over 1-d arrays."""
    return float(np.sum(w * q * np.log(q / r)))


def row_margin_numpy(q: np.ndarray, mu2: np.ndarray) -> np.ndarray:
    """Row sums of a joint table against the second-factor weights."""
    return q @ mu2


def cond_expect_numpy(v: np.ndarray, q: np.ndarray, mu2: np.ndarray) -> np.ndarray:
    """Per-row conditional expectation sum_z v*q*mu2 / sum_z q*mu2."""
    weighted = q * mu2
    return (v * weighted).sum(axis=1) / weighted.sum(axis=1)


def lincomb_numpy(stats: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """Linear combination sum_j coef[j] * stats[j] of stacked tables."""
    return np.tensordot(coef, stats, axes=1)


def stats_expect_numpy(stats: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-statistic weighted sums: out[j] = sum(stats[j] * w)."""
    return stats.reshape(stats.shape[0], -1) @ w.ravel()


def cond_expect_stats_numpy(
    stats: np.ndarray, q: np.ndarray, mu2: np.ndarray
) -> np.ndarray:
    """Per-statistic, per-row conditional expectations (d, n1) table."""
    weighted = q * mu2
    return (stats * weighted).sum(axis=2) / weighted.sum(axis=1)


# ---------------------------------------------------------------------------
# numba loop implementations (fused single-pass reductions)
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def dot3(a, b, c):
        s = 0.0
        for i in range(a.shape[0]):
            s += a[i] * b[i] * c[i]
        return s

    @njit(cache=True)
    def dot4(a, b, c, d):
        s = 0.0
        for i in range(a.shape[0]):
            s += a[i] * b[i] * c[i] * d[i]
        return s

    @njit(cache=True)
    def log_mean_exp(u, w):
        m = u[0]
        for i in range(u.shape[0]):
            if u[i] > m:
                m = u[i]
        s = 0.0
        t = 0.0
        for i in range(u.shape[0]):
            s += w[i] * np.exp(u[i] - m)
            t += w[i]
        return m + np.log(s) - np.log(t)

    @njit(cache=True)
    def kl_sum(q, r, w):
        s = 0.0
        for i in range(q.shape[0]):
            s += w[i] * q[i] * np.log(q[i] / r[i])
        return s

    @njit(cache=True)
    def row_margin(q, mu2):
        n1, n2 = q.shape
        out = np.empty(n1)
        for x in range(n1):
            s = 0.0
            for z in range(n2):
                s += q[x, z] * mu2[z]
            out[x] = s
        return out

    @njit(cache=True)
    def cond_expect(v, q, mu2):
        n1, n2 = q.shape
        out = np.empty(n1)
        for x in range(n1):
            num = 0.0
            den = 0.0
            for z in range(n2):
                w = q[x, z] * mu2[z]
                num += v[x, z] * w
                den += w
            out[x] = num / den
        return out

    @njit(cache=True)
    def lincomb(stats, coef):
        d, n1, n2 = stats.shape
        out = np.zeros((n1, n2))
        for j in range(d):
            c = coef[j]
            for x in range(n1):
                for z in range(n2):
                    out[x, z] += c * stats[j, x, z]
        return out

    @njit(cache=True)
    def stats_expect(stats, w):
        d, n1, n2 = stats.shape
        out = np.empty(d)
        for j in range(d):
            s = 0.0
            for x in range(n1):
                for z in range(n2):
                    s += stats[j, x, z] * w[x, z]
            out[j] = s
        return out

    @njit(cache=True)
    def cond_expect_stats(stats, q, mu2):
        d, n1, n2 = stats.shape
        out = np.empty((d, n1))
        for x in range(n1):
            den = 0.0
            for z in range(n2):
                den += q[x, z] * mu2[z]
            for j in range(d):
                num = 0.0
                for z in range(n2):
                    num += stats[j, x, z] * q[x, z] * mu2[z]
                out[j, x] = num / den
        return out

else:
    dot3 = dot3_numpy
    dot4 = dot4_numpy
    log_mean_exp = log_mean_exp_numpy
    kl_sum = kl_sum_numpy
    row_margin = row_margin_numpy
    cond_expect = cond_expect_numpy
    lincomb = lincomb_numpy
    stats_expect = stats_expect_numpy
    cond_expect_stats = cond_expect_stats_numpy


KERNEL_NAMES = (
    "dot3",
    "dot4",
    "log_mean_exp",
    "kl_sum",
    "row_margin",
    "cond_expect",
    "lincomb",
    "stats_expect",
    "cond_expect_stats",
)


def warmup() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs.

    A no-op on the numpy path.  Call once before timing anything.
    """
    a = np.array([0.5, 0.5])
    t2 = np.array([[0.3, 0.7], [0.6, 0.4]])
    t3 = np.array([[[1.0, -1.0], [-1.0, 1.0]]])
    dot3(a, a, a)
    dot4(a, a, a, a)
    log_mean_exp(a, a)
    kl_sum(a, a, a)
    row_margin(t2, a)
    cond_expect(t2, t2, a)
    lincomb(t3, np.array([1.0]))
    stats_expect(t3, t2)
    cond_expect_stats(t3, t2, a)
