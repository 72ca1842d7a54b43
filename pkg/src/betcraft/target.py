"""Target distribution CDFs and empirical CDFs for the KS-style tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

__all__ = [
    "TargetCDF",
    "UniformCDF",
    "NormalCDF",
    "DiscreteCDF",
    "EmpiricalCDF",
    "SortedBuffer",
]


class TargetCDF:
    """A known CDF F(x) together with its left limit F(x-)."""

    def cdf(self, x):
        raise NotImplementedError

    def cdf_left(self, x):
        """Left limit; equals cdf() for continuous distributions."""
        return self.cdf(x)

    def pit_cdf(self, u):
        """CDF of the probability-integral transform F(Y) at u.

        For a continuous F this is the Uniform([0, 1]) CDF; distributions
        with atoms must override so that threshold payoffs built on the
        transformed scale stay exactly fair.
        """
        return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)


@dataclass(frozen=True)
class UniformCDF(TargetCDF):
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)


@dataclass(frozen=True)
class NormalCDF(TargetCDF):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma)


class DiscreteCDF(TargetCDF):
    """CDF of a finite discrete distribution on real atoms."""

    def __init__(self, atoms: Sequence[float], probs: Sequence[float]):
        atoms = np.asarray(atoms, dtype=float)
        probs = np.asarray(probs, dtype=float)
        order = np.argsort(atoms)
        self.atoms = atoms[order]
        self.probs = probs[order]
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("probs must be a pmf")
        self._cum = np.cumsum(self.probs)

    def cdf(self, x):
        idx = np.searchsorted(self.atoms, np.asarray(x, dtype=float), side="right")
        return np.concatenate(([0.0], self._cum))[idx]

    def cdf_left(self, x):
        idx = np.searchsorted(self.atoms, np.asarray(x, dtype=float), side="left")
        return np.concatenate(([0.0], self._cum))[idx]

    def pit_cdf(self, u):
        """F(Y) takes the value cum_k with probability p_k, so its CDF at u
        is the largest cumulative probability that is <= u."""
        idx = np.searchsorted(self._cum, np.asarray(u, dtype=float), side="right")
        return np.concatenate(([0.0], self._cum))[idx]


class SortedBuffer:
    """Append-only multiset of reals kept sorted in a preallocated array.

    Insertion is an O(n) memmove; rank queries are vectorized searchsorted.
    """

    def __init__(self, capacity: int = 1024):
        self._data = np.empty(max(capacity, 16))
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def data(self) -> np.ndarray:
        return self._data[: self._n]

    def add(self, x: float) -> None:
        if self._n == self._data.size:
            grown = np.empty(self._data.size * 2)
            grown[: self._n] = self._data[: self._n]
            self._data = grown
        pos = int(np.searchsorted(self._data[: self._n], x))
        self._data[pos + 1 : self._n + 1] = self._data[pos : self._n]
        self._data[pos] = x
        self._n += 1

    def count_le(self, x) -> np.ndarray:
        return np.searchsorted(self._data[: self._n], x, side="right")

    def count_lt(self, x) -> np.ndarray:
        return np.searchsorted(self._data[: self._n], x, side="left")

    def min(self) -> float:
        return float(self._data[0])

    def max(self) -> float:
        return float(self._data[self._n - 1])


class EmpiricalCDF:
    """Right-continuous empirical CDF built incrementally."""

    def __init__(self):
        self._buf = SortedBuffer()

    @property
    def count(self) -> int:
        return len(self._buf)

    @property
    def sorted_samples(self) -> np.ndarray:
        return self._buf.data

    def add(self, x: float) -> None:
        self._buf.add(x)

    def cdf(self, x):
        if len(self._buf) == 0:
            raise ValueError("empirical CDF has no samples")
        return self._buf.count_le(x) / len(self._buf)

    def min(self) -> float:
        return self._buf.min()

    def max(self) -> float:
        return self._buf.max()
