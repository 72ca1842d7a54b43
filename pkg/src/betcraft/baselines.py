"""Reference tests for benchmarking: batch KS / chi-squared / kernel-MMD and
the sequential threshold-crossing tests (HR, DR, MR, BR)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.special import gammainc

from .kernels import GaussianKernel, Kernel, PairedGramState, mmd_squared_biased
from .target import TargetCDF

__all__ = [
    "BaselineResult",
    "kolmogorov_quantile",
    "ks_distance_1s",
    "ks_distance_2s",
    "batch_ks1",
    "batch_ks2",
    "chi2_quantile",
    "batch_chi2",
    "batch_mmd",
    "hr_threshold_1s",
    "hr_threshold_2s",
    "dr_threshold_1s",
    "dr_threshold_2s",
    "mr_mmd_threshold",
    "default_ell",
    "seq_ks1",
    "seq_ks2",
    "mr_mmd_sequential",
    "br_sequential",
]


@dataclass
class BaselineResult:
    statistic: float
    threshold: float
    reject: bool
    tau: Optional[int] = None
    n: Optional[int] = None


def _ks_series(s: float, tol: float = 1e-12) -> float:
    """P(K > s) for the asymptotic Kolmogorov distribution,
    2 * sum_k (-1)^(k-1) exp(-2 k^2 s^2), truncated below ``tol``."""
    total = 0.0
    sign = 1.0
    for k in range(1, 10_000):
        term = math.exp(-2.0 * k * k * s * s)
        if term < tol:
            break
        total += sign * term
        sign = -sign
    return 2.0 * total


def kolmogorov_quantile(alpha: float) -> float:
    """Asymptotic upper quantile of sqrt(n) * D_n, by bisection on [0.2, 3]."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = 0.2, 3.0
    if _ks_series(lo) <= alpha:
        return lo  # series breaks down below; clamp
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _ks_series(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ks_distance_1s(samples, target: TargetCDF) -> float:
    """Exact sup-norm distance between the ECDF and a target CDF."""
    a = np.sort(np.asarray(samples, dtype=float))
    n = a.size
    if n < 1:
        raise ValueError("need at least one sample")
    f_right = np.asarray(target.cdf(a), dtype=float)
    f_left = np.asarray(target.cdf_left(a), dtype=float)
    above = np.arange(1, n + 1) / n - f_right
    below = f_left - np.arange(0, n) / n
    return float(max(above.max(), below.max(), 0.0))


def ks_distance_2s(xs, ys) -> float:
    """Exact sup-norm distance between two ECDFs."""
    xs = np.sort(np.asarray(xs, dtype=float))
    ys = np.sort(np.asarray(ys, dtype=float))
    pooled = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, pooled, side="right") / xs.size
    fy = np.searchsorted(ys, pooled, side="right") / ys.size
    return float(np.abs(fx - fy).max())


def batch_ks1(samples, target: TargetCDF, alpha: float) -> BaselineResult:
    """Fixed-n one-sample KS test with the asymptotic quantile."""
    n = len(samples)
    stat = math.sqrt(n) * ks_distance_1s(samples, target)
    thr = kolmogorov_quantile(alpha)
    return BaselineResult(stat, thr, stat >= thr, n=n)


def batch_ks2(xs, ys, alpha: float) -> BaselineResult:
    """Fixed-n two-sample KS test, classical sqrt(nm/(n+m)) scaling."""
    n, m = len(xs), len(ys)
    stat = math.sqrt(n * m / (n + m)) * ks_distance_2s(xs, ys)
    thr = kolmogorov_quantile(alpha)
    return BaselineResult(stat, thr, stat >= thr, n=n)


def chi2_quantile(df: int, alpha: float) -> float:
    """Upper 1-alpha quantile of chi-squared(df), by bisection on the
    regularized incomplete gamma CDF."""
    if df < 1 or not (0.0 < alpha < 1.0):
        raise ValueError("need df >= 1 and alpha in (0, 1)")
    target = 1.0 - alpha
    lo, hi = 0.0, 1.0
    while gammainc(df / 2.0, hi / 2.0) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gammainc(df / 2.0, mid / 2.0) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def batch_chi2(counts, p, alpha: float) -> BaselineResult:
    """Pearson chi-squared goodness-of-fit against pmf ``p``."""
    counts = np.asarray(counts, dtype=float)
    p = np.asarray(p, dtype=float)
    n = counts.sum()
    stat = float(np.sum((counts - n * p) ** 2 / (n * p)))
    thr = chi2_quantile(len(p) - 1, alpha)
    return BaselineResult(stat, thr, stat >= thr, n=int(n))


def batch_mmd(
    xs, ys, k: Kernel, alpha: float, n_boot: int = 1000, rng: Optional[np.random.Generator] = None
) -> BaselineResult:
    """Fixed-n kernel-MMD test; threshold is the empirical 1-alpha quantile of
    the statistic over random relabelings of the pooled sample."""
    rng = np.random.default_rng() if rng is None else rng
    xs = np.asarray(xs, dtype=float).reshape(len(xs), -1)
    ys = np.asarray(ys, dtype=float).reshape(len(ys), -1)
    n = xs.shape[0]
    stat = math.sqrt(max(mmd_squared_biased(xs, ys, k), 0.0))
    pooled = np.concatenate([xs, ys], axis=0)
    # Full pooled Gram, reused across relabelings.
    gram = k.cross(pooled, pooled)
    draws = np.empty(n_boot)
    for b in range(n_boot):
        perm = rng.permutation(pooled.shape[0])
        ia, ib = perm[:n], perm[n:]
        mmd2 = (
            gram[np.ix_(ia, ia)].sum() / n**2
            + gram[np.ix_(ib, ib)].sum() / (pooled.shape[0] - n) ** 2
            - 2.0 * gram[np.ix_(ia, ib)].sum() / (n * (pooled.shape[0] - n))
        )
        draws[b] = math.sqrt(max(mmd2, 0.0))
    thr = float(np.quantile(draws, 1.0 - alpha))
    return BaselineResult(stat, thr, stat >= thr, n=n)


def _safe_loglog(a: float) -> float:
    """log log with both inner arguments clamped below at e."""
    return math.log(max(math.log(max(a, math.e)), 1.0))


def hr_threshold_1s(t: int, alpha: float) -> float:
    c = 0.8 * math.log(1612.0 / alpha)
    return 0.85 * math.sqrt(_safe_loglog(1.0 + math.log(t)) + c)


def hr_threshold_2s(t: int, alpha: float) -> float:
    c = 0.8 * math.log(3224.0 / alpha)
    return 1.70 * math.sqrt(_safe_loglog(1.0 + math.log(t)) + c)


def dr_threshold_1s(t: int, alpha: float) -> float:
    return math.sqrt((t + 1) / t**2 * 2.0 * math.log(t) + math.log(4.0 * math.sqrt(2.0) / alpha))


def dr_threshold_2s(t: int, alpha: float) -> float:
    return 2.0 * math.sqrt(
        (t + 1) / t**2 * 2.0 * math.log(t) + math.log(8.0 * math.sqrt(2.0) / alpha)
    )


def default_ell(x: float) -> float:
    return (1.0 + x) ** 2


def mr_mmd_threshold(t: int, alpha: float, B: float = 1.0, ell: Callable[[float], float] = default_ell) -> float:
    if t < 2:
        raise ValueError("threshold defined for t >= 2")
    inner = math.log(ell(math.log2(t))) + math.log(1.0 / alpha)
    return math.sqrt(2.0) * B + 4.0 * B * math.sqrt(2.0 / t * inner)


class _RunningKS1:
    """Sorted buffer of target-CDF-transformed samples; exact one-sample KS
    distance in O(t) per step."""

    def __init__(self, target: TargetCDF):
        self.target = target
        self._f = np.empty(1024)
        self._n = 0

    def add(self, y: float) -> None:
        if self._n == self._f.size:
            grown = np.empty(self._f.size * 2)
            grown[: self._n] = self._f[: self._n]
            self._f = grown
        v = float(self.target.cdf(y))
        pos = int(np.searchsorted(self._f[: self._n], v))
        self._f[pos + 1 : self._n + 1] = self._f[pos : self._n]
        self._f[pos] = v
        self._n += 1

    def distance(self) -> float:
        n = self._n
        f = self._f[:n]
        ranks = np.arange(1, n + 1)
        return float(max((ranks / n - f).max(), (f - (ranks - 1) / n).max(), 0.0))


def seq_ks1(
    stream: Iterable[float],
    target: TargetCDF,
    alpha: float,
    n_max: int,
    threshold_fn: Callable[[int, float], float],
) -> BaselineResult:
    """Sequential one-sample KS threshold test (HR or DR rule)."""
    run = _RunningKS1(target)
    t = 0
    last = 0.0
    for y in stream:
        t += 1
        run.add(float(y))
        last = run.distance()
        thr = threshold_fn(t, alpha)
        if last >= thr:
            return BaselineResult(last, thr, True, tau=t, n=t)
        if t >= n_max:
            break
    return BaselineResult(last, threshold_fn(max(t, 1), alpha), False, tau=None, n=t)


def seq_ks2(
    pairs: Iterable[tuple[float, float]],
    alpha: float,
    n_max: int,
    threshold_fn: Callable[[int, float], float],
) -> BaselineResult:
    """Sequential two-sample KS threshold test (HR or DR rule)."""
    from .target import SortedBuffer

    xs, ys = SortedBuffer(), SortedBuffer()
    t = 0
    last = 0.0
    for x, y in pairs:
        t += 1
        xs.add(float(x))
        ys.add(float(y))
        pooled = np.concatenate([xs.data, ys.data])
        last = float(np.abs(xs.count_le(pooled) / t - ys.count_le(pooled) / t).max())
        thr = threshold_fn(t, alpha)
        if last >= thr:
            return BaselineResult(last, thr, True, tau=t, n=t)
        if t >= n_max:
            break
    return BaselineResult(last, threshold_fn(max(t, 1), alpha), False, tau=None, n=t)


def mr_mmd_sequential(
    pairs: Iterable,
    k: Kernel,
    alpha: float,
    n_max: int,
    ell: Callable[[float], float] = default_ell,
) -> BaselineResult:
    """Sequential MMD threshold test with the time-uniform MR boundary."""
    gram = PairedGramState(k)
    t = 0
    last = 0.0
    for x, y in pairs:
        t += 1
        gram.add(x, y)
        if t >= 2:
            last = gram.mmd_biased()
            thr = mr_mmd_threshold(t, alpha, k.B, ell)
            if last >= thr:
                return BaselineResult(last, thr, True, tau=t, n=t)
        if t >= n_max:
            break
    return BaselineResult(last, mr_mmd_threshold(max(t, 2), alpha, k.B, ell), False, tau=None, n=t)


def br_sequential(
    pairs: Iterable,
    k: Kernel = GaussianKernel(1.0),
    alpha: float = 0.05,
    n_max: int = 10_000,
) -> BaselineResult:
    """Linear-time sequential MMD test: pairs are consumed two at a time and
    each block contributes one summand to the running statistic."""
    t = 0
    stat = 0.0
    var_sum = 0.0
    thr = math.inf
    prev: Optional[tuple] = None
    for x, y in pairs:
        t += 1
        if prev is None:
            prev = (x, y)
        else:
            x1, y1 = prev
            prev = None
            h = float(k(x1, x) + k(y1, y) - k(x1, y) - k(x, y1))
            stat += h
            var_sum += h * h
            # Iterated-logarithm boundary: the log(1/alpha) and log log(V/alpha)
            # terms multiply the empirical variance inside the square root.
            # (An additive grouping would sit below the LIL envelope
            # sqrt(2 V log log V) and be crossed by a null random walk with
            # probability -> 1.)
            thr = 1.1 * math.sqrt(
                2.0
                * var_sum
                * (math.log(1.0 / alpha) + _safe_loglog_ratio(var_sum, alpha))
            )
            if stat >= thr:
                return BaselineResult(stat, thr, True, tau=t, n=t)
        if t >= n_max:
            break
    return BaselineResult(stat, thr, False, tau=None, n=t)


def _safe_loglog_ratio(v: float, alpha: float) -> float:
    """log log(V/alpha) with the inner argument clamped below at e."""
    return math.log(max(math.log(max(v / alpha, math.e)), 1.0))
