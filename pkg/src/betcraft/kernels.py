"""Gaussian kernel, incrementally maintained Gram sums, and the biased MMD
statistic used by the kernel two-sample tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "GaussianKernel",
    "kernel_eval",
    "mmd_squared_biased",
    "PairedGramState",
    "DegenerateWitness",
]


class DegenerateWitness(Exception):
    """Empirical mean embeddings coincide; the witness direction is undefined."""


@dataclass(frozen=True)
class GaussianKernel:
    """K(x, y) = exp(-||x - y||^2 / (2 b^2)); B = sup sqrt(K(x, x)) = 1."""

    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def B(self) -> float:
        return 1.0

    def __call__(self, x, y) -> np.ndarray:
        """Evaluate pointwise on broadcastable stacks of observations."""
        x = _as_points(x)
        y = _as_points(y)
        if x.shape[-1] != y.shape[-1]:
            raise ValueError("dimension mismatch between kernel arguments")
        sq = np.sum((x - y) ** 2, axis=-1)
        return np.exp(-sq / (2.0 * self.bandwidth**2))

    def cross(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Full Gram block K(xs_i, ys_j), via the gemm-based distance trick."""
        xs = _as_points(xs)
        ys = _as_points(ys)
        sq = (
            np.sum(xs**2, axis=1)[:, None]
            + np.sum(ys**2, axis=1)[None, :]
            - 2.0 * xs @ ys.T
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * self.bandwidth**2))


Kernel = GaussianKernel


def _as_points(a) -> np.ndarray:
    """Normalize observations to a (..., d) float array (scalars become d=1)."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        return a.reshape(1)
    return a


def kernel_eval(k: Kernel, x, y) -> float:
    return float(k(x, y))


def mmd_squared_biased(xs, ys, k: Kernel) -> float:
    """Biased (V-statistic) squared MMD between two samples."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float).reshape(len(xs), -1))
    ys = np.atleast_2d(np.asarray(ys, dtype=float).reshape(len(ys), -1))
    n, m = xs.shape[0], ys.shape[0]
    value = (
        k.cross(xs, xs).sum() / n**2
        + k.cross(ys, ys).sum() / m**2
        - 2.0 * k.cross(xs, ys).sum() / (n * m)
    )
    # A squared RKHS norm; cancellation can leave a tiny negative residue.
    return max(float(value), 0.0)


class PairedGramState:
    """Running Gram sums for a paired sample stream.

    Maintains sum K(X_i, X_j), sum K(Y_i, Y_j) and sum K(X_i, Y_j) over the
    full index square (diagonal included), updated in O(t) per appended pair.
    """

    def __init__(self, kernel: Kernel, capacity: int = 1024):
        self.kernel = kernel
        self._xs: np.ndarray | None = None
        self._ys: np.ndarray | None = None
        self._n = 0
        self._cap = max(capacity, 16)
        self.sum_xx = 0.0
        self.sum_yy = 0.0
        self.sum_xy = 0.0

    def __len__(self) -> int:
        return self._n

    @property
    def xs(self) -> np.ndarray:
        return self._xs[: self._n]

    @property
    def ys(self) -> np.ndarray:
        return self._ys[: self._n]

    def _ensure(self, d: int) -> None:
        if self._xs is None:
            self._xs = np.empty((self._cap, d))
            self._ys = np.empty((self._cap, d))
        elif self._n == self._xs.shape[0]:
            self._xs = np.concatenate([self._xs, np.empty_like(self._xs)])
            self._ys = np.concatenate([self._ys, np.empty_like(self._ys)])

    def rows_pair(self, x, y) -> Optional[tuple[np.ndarray, np.ndarray]]:
        """Kernel rows of the pair (x, y) against both histories in two gemm
        calls: ``kx[i] = K(point_i, X_j)`` and ``ky[i] = K(point_i, Y_j)``
        where point_0 = x, point_1 = y.  None when the history is empty."""
        if self._n == 0:
            return None
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        pts = np.stack([x, y])
        return self.kernel.cross(pts, self.xs), self.kernel.cross(pts, self.ys)

    def add(self, x, y, rows: Optional[tuple[np.ndarray, np.ndarray]] = None) -> None:
        """Append a pair; ``rows`` may pass precomputed :meth:`rows_pair`
        output (against the pre-append histories) to avoid recomputation."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        self._ensure(x.size)
        n = self._n
        if n > 0:
            if rows is None:
                rows = self.rows_pair(x, y)
            kx, ky = rows
            self.sum_xx += 2.0 * kx[0].sum() + float(self.kernel(x, x))
            self.sum_yy += 2.0 * ky[1].sum() + float(self.kernel(y, y))
            self.sum_xy += kx[1].sum() + ky[0].sum() + float(self.kernel(x, y))
        else:
            self.sum_xx = float(self.kernel(x, x))
            self.sum_yy = float(self.kernel(y, y))
            self.sum_xy = float(self.kernel(x, y))
        self._xs[n] = x
        self._ys[n] = y
        self._n = n + 1

    def _row(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Kernel of one point against both histories."""
        k = self.kernel
        return (
            k.cross(z[None, :], self.xs)[0],
            k.cross(z[None, :], self.ys)[0],
        )

    def gap_norm_sq(self) -> float:
        """Unnormalized ||sum phi(X_i) - sum phi(Y_i)||^2 (clamped at 0)."""
        return max(self.sum_xx + self.sum_yy - 2.0 * self.sum_xy, 0.0)

    def witness_raw(self, z) -> float:
        """Unnormalized witness numerator sum_i K(X_i, z) - K(Y_i, z)."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        kx, ky = self._row(z)
        return float(kx.sum() - ky.sum())

    @staticmethod
    def witness_raw_pair(rows: tuple[np.ndarray, np.ndarray]) -> tuple[float, float]:
        """Unnormalized witness numerators at both points of a
        :meth:`rows_pair` result."""
        kx, ky = rows
        return float(kx[0].sum() - ky[0].sum()), float(kx[1].sum() - ky[1].sum())

    def mmd_biased(self) -> float:
        """Biased MMD estimate between the two histories."""
        if self._n == 0:
            raise ValueError("no samples")
        return math.sqrt(self.gap_norm_sq()) / self._n
