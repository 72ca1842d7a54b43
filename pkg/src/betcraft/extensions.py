"""Betting tests beyond plain one/two-sample: second-order stochastic
dominance (paired streams on [0, 1]) and symmetry about zero."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .betting import ONE_SIDED_GRID, PayoffStrategy, TWO_SIDED_GRID
from .target import SortedBuffer

__all__ = [
    "DominanceState",
    "dominance_select_z",
    "dominance_payoff",
    "dominance_operator",
    "DominanceStrategy",
    "SymmetryState",
    "symmetry_select_z",
    "symmetry_payoff",
    "SymmetryStrategy",
]


def dominance_operator(k: int, z, samples) -> np.ndarray:
    """Empirical iterated-integral operator of the ECDF.

    k = 1 is the ECDF itself; each further level integrates the previous one
    from 0, giving (1/n) sum relu(z - X_i)^(k-1) / (k-1)!.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    samples = np.asarray(samples, dtype=float)
    z = np.asarray(z, dtype=float)
    if k == 1:
        return (samples[None, ...] <= z[..., None]).mean(axis=-1)
    gaps = np.maximum(z[..., None] - samples[None, ...], 0.0)
    return (gaps ** (k - 1)).mean(axis=-1) / math.gamma(k)


class DominanceState:
    """Incremental criterion sums for the second-order dominance test.

    For each grid point z the running sums of relu(z - X_i) and relu(z - Y_i)
    are maintained, so selection is O(grid) per step.
    """

    def __init__(self, n_grid: int = 512):
        self.z_grid = np.linspace(0.0, 1.0, n_grid)
        self.sum_x = np.zeros(n_grid)
        self.sum_y = np.zeros(n_grid)
        self.t = 0

    def add(self, x: float, y: float) -> None:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError("dominance test requires observations in [0, 1]")
        self.sum_x += np.maximum(self.z_grid - x, 0.0)
        self.sum_y += np.maximum(self.z_grid - y, 0.0)
        self.t += 1


def dominance_select_z(state: DominanceState) -> float:
    """Grid argmax of the empirical second-order dominance gap, ties to the
    smallest grid point."""
    if state.t < 1:
        raise ValueError("need at least one observed pair")
    criterion = (state.sum_x - state.sum_y) / state.t
    return float(state.z_grid[int(np.argmax(criterion))])


def dominance_payoff(x: float, y: float, z: float) -> float:
    """Ramp-difference payoff relu(z - x) - relu(z - y); mean zero when P = Q."""
    return float(max(z - x, 0.0) - max(z - y, 0.0))


class DominanceStrategy(PayoffStrategy):
    """Second-order stochastic dominance betting strategy on [0, 1] pairs."""

    bet_grid = ONE_SIDED_GRID

    def __init__(self, n_grid: int = 512):
        self.state = DominanceState(n_grid)
        self._z: Optional[float] = None

    def payoff(self, z) -> float:
        if self._z is None:
            return 0.0
        x, y = z
        return dominance_payoff(float(x), float(y), self._z)

    def observe(self, z) -> None:
        x, y = z
        self.state.add(float(x), float(y))
        self._z = dominance_select_z(self.state)


class SymmetryState:
    """Sample history and positive-axis threshold grid for the symmetry test."""

    def __init__(self, n_grid: int = 512):
        self.samples = SortedBuffer()
        self.n_grid = n_grid
        self._grid: Optional[np.ndarray] = None
        self._max_abs: Optional[float] = None

    def add(self, y: float) -> None:
        self.samples.add(y)

    def z_grid(self) -> np.ndarray:
        hi = max(abs(self.samples.min()), abs(self.samples.max()))
        if self._max_abs != hi:
            self._grid = np.array([0.0]) if hi == 0.0 else np.linspace(0.0, hi, self.n_grid)
            self._max_abs = hi
        return self._grid


def symmetry_select_z(state: SymmetryState) -> float:
    """Grid argmax of |F(z) + F(-z) - 1| over z >= 0, ties to smallest z."""
    n = len(state.samples)
    if n < 1:
        raise ValueError("need at least one observed sample")
    grid = state.z_grid()
    crit = np.abs(
        state.samples.count_le(grid) / n + state.samples.count_le(-grid) / n - 1.0
    )
    return float(grid[int(np.argmax(crit))])


def symmetry_payoff(y: float, z: float) -> float:
    """Two-sided indicator payoff 1{y <= z} - 1{y >= -z}.

    Mean zero under any continuous distribution symmetric about 0.
    """
    return float((y <= z) - (y >= -z))


class SymmetryStrategy(PayoffStrategy):
    """Betting test of symmetry about zero on a two-sided bet grid."""

    bet_grid = TWO_SIDED_GRID

    def __init__(self, n_grid: int = 512):
        self.state = SymmetryState(n_grid)
        self._z: Optional[float] = None

    def payoff(self, z) -> float:
        if self._z is None:
            return 0.0
        return symmetry_payoff(float(z), self._z)

    def observe(self, z) -> None:
        self.state.add(float(z))
        self._z = symmetry_select_z(self.state)
