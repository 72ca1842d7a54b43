"""Two-sample payoff strategies from paired streams: plug-in KS, plug-in
kernel-MMD witness betting, and the coin-betting (KT potential) MMD strategy."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .betting import (
    CompoundedWealth,
    ONE_SIDED_GRID,
    PayoffStrategy,
    TWO_SIDED_GRID,
)
from .kernels import DegenerateWitness, GaussianKernel, Kernel, PairedGramState
from .one_sample import ks_slack
from .target import SortedBuffer

__all__ = [
    "PairedHistory",
    "ks2_select_u",
    "ks2_payoff",
    "KS2PluginStrategy",
    "MMDWitnessState",
    "mmd_witness_eval",
    "mmd_payoff_plugin",
    "MMDPluginStrategy",
    "kt_log_potential",
    "KTState",
    "kt_payoff",
    "KTMMDStrategy",
]

WITNESS_TOL = 1e-12


class PairedHistory:
    """Sorted buffers of the two real-valued sample streams, with a cached
    candidate grid spanning the pooled sample range."""

    def __init__(self, grid_cap: int = 5000):
        self.xs = SortedBuffer()
        self.ys = SortedBuffer()
        self.grid_cap = grid_cap
        self._grid: Optional[np.ndarray] = None
        self._extremes: Optional[tuple[float, float]] = None

    def __len__(self) -> int:
        return len(self.xs)

    def add(self, x: float, y: float) -> None:
        self.xs.add(x)
        self.ys.add(y)

    def candidate_grid(self) -> np.ndarray:
        lo = min(self.xs.min(), self.ys.min())
        hi = max(self.xs.max(), self.ys.max())
        if self._extremes != (lo, hi):
            self._grid = np.array([lo]) if lo == hi else np.linspace(lo, hi, self.grid_cap)
            self._extremes = (lo, hi)
        return self._grid


def ks2_select_u(history: PairedHistory, t: int, grid_cap: int = 5000, slack: float = 4.0) -> float:
    """Smallest candidate point whose ECDF gap is within
    ``slack * sqrt(2 log t / t)`` of the maximal gap between the two
    empirical CDFs (``slack=0`` gives the plain argmax used in practice)."""
    n = len(history)
    if n < 1:
        raise ValueError("need at least one observed pair")
    if t < 2:
        raise ValueError("selection starts at step 2")
    grid = history.candidate_grid()
    gap = np.abs(history.ys.count_le(grid) - history.xs.count_le(grid)) / n
    cutoff = gap.max() - slack * ks_slack(t)
    return float(grid[int(np.argmax(gap >= cutoff))])


def ks2_payoff(x: float, y: float, u: float) -> float:
    """Paired indicator bet 1{y <= u} - 1{x <= u}; mean zero when P = Q."""
    return float((y <= u) - (x <= u))


class KS2PluginStrategy(PayoffStrategy):
    """Plug-in sequential two-sample KS strategy on a two-sided bet grid."""

    bet_grid = TWO_SIDED_GRID

    def __init__(self, grid_cap: int = 5000, slack: float = 0.0):
        self.history = PairedHistory(grid_cap)
        self._t = 1
        self._slack = slack
        self._u: Optional[float] = None

    def payoff(self, z) -> float:
        if self._u is None:
            return 0.0
        x, y = z
        return ks2_payoff(float(x), float(y), self._u)

    def observe(self, z) -> None:
        x, y = z
        self.history.add(float(x), float(y))
        self._t += 1
        self._u = ks2_select_u(self.history, self._t, self.history.grid_cap, self._slack)


class MMDWitnessState:
    """Plug-in witness machinery: paired history with incremental Gram sums."""

    def __init__(self, kernel: Kernel = GaussianKernel(1.0)):
        self.kernel = kernel
        self.gram = PairedGramState(kernel)

    def __len__(self) -> int:
        return len(self.gram)

    def add(self, x, y) -> None:
        self.gram.add(x, y)


def mmd_witness_eval(state: MMDWitnessState, x) -> float:
    """Unit-RKHS-norm witness (mu_P_hat - mu_Q_hat) / ||.|| evaluated at x."""
    denom = math.sqrt(state.gram.gap_norm_sq())
    if denom <= WITNESS_TOL:
        raise DegenerateWitness
    return state.gram.witness_raw(x) / denom


def mmd_payoff_plugin(state: MMDWitnessState, x, y, rows=None) -> float:
    """Witness-difference payoff (g(x) - g(y)) / (2B); zero when degenerate."""
    denom = math.sqrt(state.gram.gap_norm_sq())
    if denom <= WITNESS_TOL:
        return 0.0
    if rows is None:
        rows = state.gram.rows_pair(x, y)
    wx, wy = state.gram.witness_raw_pair(rows)
    return (wx - wy) / denom / (2.0 * state.kernel.B)


class MMDPluginStrategy(PayoffStrategy):
    """Plug-in sequential kernel-MMD strategy on a one-sided bet grid."""

    bet_grid = ONE_SIDED_GRID

    def __init__(self, kernel: Kernel = GaussianKernel(1.0)):
        self.state = MMDWitnessState(kernel)
        self._pending = None  # (z, rows) reused between payoff() and observe()

    def _rows_for(self, z):
        if self._pending is not None and self._pending[0] is z:
            return self._pending[1]
        rows = self.state.gram.rows_pair(*z)
        self._pending = (z, rows)
        return rows

    def payoff(self, z) -> float:
        if len(self.state) == 0:
            return 0.0
        x, y = z
        return mmd_payoff_plugin(self.state, x, y, rows=self._rows_for(z))

    def observe(self, z) -> None:
        x, y = z
        self.state.gram.add(x, y, rows=self._rows_for(z))
        self._pending = None


def kt_log_potential(t: int, x: float) -> float:
    """log of the Krichevsky-Trofimov coin-betting potential at argument x."""
    if abs(x) >= t + 1:
        raise ValueError(f"potential argument |{x}| must be < t + 1 = {t + 1}")
    return (
        t * math.log(2.0)
        - math.log(math.pi)
        - gammaln(t + 1)
        + gammaln((t + 1 + x) / 2.0)
        + gammaln((t + 1 - x) / 2.0)
    )


class KTState:
    """State of the coin-betting MMD strategy: paired Gram history plus the
    cumulative sum of emitted payoffs (current wealth minus one)."""

    def __init__(self, kernel: Kernel = GaussianKernel(1.0)):
        self.kernel = kernel
        self.gram = PairedGramState(kernel)
        self.payoff_cumsum = 0.0

    @property
    def step(self) -> int:
        return len(self.gram) + 1


def kt_bet_fraction(t: int, w_norm: float) -> float:
    """Signed bet fraction from the log-potential gap, always in (-1, 1)."""
    hi = min(w_norm + 1.0, t + 1 - 1e-9)
    lo = max(w_norm - 1.0, -(t + 1) + 1e-9)
    return math.tanh(0.5 * (kt_log_potential(t, hi) - kt_log_potential(t, lo)))


def kt_payoff(state: KTState, x, y, rows=None) -> float:
    """Coin-betting payoff g_t(x) - g_t(y) with wealth-scaled magnitude."""
    t = state.step
    n_hist = len(state.gram)
    if n_hist == 0:
        return 0.0
    raw_norm = math.sqrt(state.gram.gap_norm_sq())
    if raw_norm <= WITNESS_TOL:
        return 0.0
    # v_t is evaluated at the 1/(t-1)-normalized embedding-gap norm.
    w_norm = raw_norm / n_hist
    v = kt_bet_fraction(t, w_norm)
    if rows is None:
        rows = state.gram.rows_pair(x, y)
    wx, wy = state.gram.witness_raw_pair(rows)
    witness_gap = (wx - wy) / raw_norm
    return v / (2.0 * state.kernel.B) * witness_gap * (1.0 + state.payoff_cumsum)


class KTMMDStrategy(PayoffStrategy):
    """Kernel-MMD strategy betting via the KT potential; the bet magnitude is
    internal, so wealth is tracked by simple compounding."""

    def __init__(self, kernel: Kernel = GaussianKernel(1.0)):
        self.state = KTState(kernel)
        self._pending = None  # (z, rows) reused between payoff() and observe()

    def new_wealth(self):
        return CompoundedWealth()

    def _rows_for(self, z):
        if self._pending is not None and self._pending[0] is z:
            return self._pending[1]
        rows = self.state.gram.rows_pair(*z)
        self._pending = (z, rows)
        return rows

    def payoff(self, z) -> float:
        x, y = z
        return kt_payoff(self.state, x, y, rows=self._rows_for(z))

    def observe(self, z) -> None:
        x, y = z
        self.state.payoff_cumsum += self.payoff(z)
        self.state.gram.add(x, y, rows=self._rows_for(z))
        self._pending = None
