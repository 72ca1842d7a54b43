"""One-sample payoff strategies: sequential KS (plug-in and exponential
weights) and the chi-squared test on finite supports (plug-in and projected
gradient)."""

from __future__ import annotations

import math
from typing import Hashable, Optional, Sequence

import numpy as np
from scipy.special import softmax

from .betting import (
    HedgedStrategyMixin,
    ONE_SIDED_GRID,
    OutOfSupport,
    PayoffStrategy,
    TWO_SIDED_GRID,
)
from .target import EmpiricalCDF, TargetCDF

__all__ = [
    "KS1PluginState",
    "ks1_select_u",
    "ks1_payoff",
    "KS1PluginStrategy",
    "EWState",
    "ew_update",
    "ew_payoffs",
    "EWKSStrategy",
    "Chi2State",
    "chi2_payoff",
    "chi2_pgd_update",
    "Chi2Strategy",
    "project_simplex",
]


def ks_slack(t: int) -> float:
    """Deviation allowance sqrt(2 log(t) / t) for the near-argmax set."""
    return math.sqrt(2.0 * math.log(t) / t)


class KS1PluginState:
    """History for the plug-in sequential KS test.

    Candidate points for the betting threshold are an equally spaced grid
    between the smallest and largest samples seen so far, capped at
    ``grid_cap`` points.  The grid and the target CDF values on it are cached
    until the sample extremes change.
    """

    def __init__(self, target: TargetCDF, grid_cap: int = 5000):
        self.ecdf = EmpiricalCDF()
        self.target = target
        self.grid_cap = grid_cap
        self._grid: Optional[np.ndarray] = None
        self._target_on_grid: Optional[np.ndarray] = None
        self._extremes: Optional[tuple[float, float]] = None

    def add(self, y: float) -> None:
        self.ecdf.add(y)

    def candidate_grid(self) -> np.ndarray:
        lo, hi = self.ecdf.min(), self.ecdf.max()
        if self._extremes != (lo, hi):
            if lo == hi:
                self._grid = np.array([lo])
            else:
                self._grid = np.linspace(lo, hi, self.grid_cap)
            self._target_on_grid = np.asarray(self.target.cdf(self._grid), dtype=float)
            self._extremes = (lo, hi)
        return self._grid

    def target_on_grid(self) -> np.ndarray:
        self.candidate_grid()
        return self._target_on_grid


def ks1_select_u(state: KS1PluginState, t: int, slack: float = 2.0) -> float:
    """Smallest candidate point whose empirical CDF deviation is within
    ``slack * sqrt(2 log t / t)`` of the maximal deviation.

    ``slack=2`` is the definitional near-argmax set; ``slack=0`` degenerates
    to the plain argmax (ties to the smallest point) used in practice.
    """
    if state.ecdf.count < 1:
        raise ValueError("need at least one observed sample")
    if t < 2:
        raise ValueError("selection starts at step 2")
    grid = state.candidate_grid()
    gap = np.abs(state.ecdf.cdf(grid) - state.target_on_grid())
    cutoff = gap.max() - slack * ks_slack(t)
    return float(grid[int(np.argmax(gap >= cutoff))])


def ks1_payoff(y: float, u: float, target: TargetCDF) -> float:
    """Indicator bet 1{y <= u} - F_P(u); mean zero under the target."""
    return float((y <= u) - target.cdf(u))


class KS1PluginStrategy(PayoffStrategy):
    """Plug-in sequential KS strategy betting through a two-sided grid."""

    bet_grid = TWO_SIDED_GRID

    def __init__(self, target: TargetCDF, grid_cap: int = 5000, slack: float = 0.0):
        self.state = KS1PluginState(target, grid_cap)
        self._t = 1
        self._slack = slack
        self._u: Optional[float] = None
        self._fu: float = 0.0

    def payoff(self, z) -> float:
        if self._u is None:
            return 0.0
        return float((z <= self._u) - self._fu)

    def observe(self, z) -> None:
        self.state.add(float(z))
        self._t += 1
        self._u = ks1_select_u(self.state, self._t, self._slack)
        self._fu = float(self.state.target.cdf(self._u))


class EWState:
    """Exponential-weights posteriors over a threshold grid on [0, 1].

    Two mirrored weight vectors track the positive and negative deviation
    directions; ``eta`` is the step-size schedule (default 1/sqrt(t)).
    """

    def __init__(self, u_grid: Optional[np.ndarray] = None, eta=None):
        self.u_grid = np.linspace(0.0, 1.0, 512) if u_grid is None else np.asarray(u_grid, float)
        self.log_weights_plus = np.zeros(self.u_grid.size)
        self.log_weights_minus = np.zeros(self.u_grid.size)
        self.t = 0
        self.eta = eta if eta is not None else (lambda t: 1.0 / math.sqrt(max(t, 1)))

    def weights_plus(self) -> np.ndarray:
        return softmax(self.log_weights_plus)

    def weights_minus(self) -> np.ndarray:
        return softmax(self.log_weights_minus)


def ew_update(state: EWState, x: float, target: TargetCDF) -> EWState:
    """Score every threshold by the indicator payoff of ``x`` and tilt the
    plus/minus weights in opposite directions."""
    scores = (x <= state.u_grid).astype(float) - np.asarray(target.cdf(state.u_grid), float)
    eta = state.eta(state.t)
    state.log_weights_plus += eta * scores
    state.log_weights_minus -= eta * scores
    state.t += 1
    return state


def ew_payoffs(state: EWState, y: float, target: TargetCDF) -> tuple[float, float]:
    """Posterior-mean indicator payoffs for the two hedged legs."""
    base = (y <= state.u_grid).astype(float) - np.asarray(target.cdf(state.u_grid), float)
    f_plus = float(np.dot(state.weights_plus(), base))
    f_minus = float(np.dot(state.weights_minus(), -base))
    return f_plus, f_minus


class _PitCDF(TargetCDF):
    """CDF of F_P(Y) on the transformed [0, 1] scale (uniform when F_P is
    continuous; steps at the cumulative probabilities when it has atoms)."""

    def __init__(self, target: TargetCDF):
        self._target = target

    def cdf(self, u):
        return self._target.pit_cdf(u)


class EWKSStrategy(HedgedStrategyMixin, PayoffStrategy):
    """Hedged exponential-weights KS strategy.

    Observations are mapped through the target CDF first, so the threshold
    grid lives on [0, 1]; the null CDF on that scale is the CDF of the
    transform F_P(Y) (uniform for continuous targets), keeping the payoffs
    exactly fair.  Each hedged leg bets through a one-sided grid.
    """

    bet_grid = ONE_SIDED_GRID

    def __init__(self, target: TargetCDF, n_grid: int = 512, eta=None):
        self.target = target
        self.state = EWState(np.linspace(0.0, 1.0, n_grid), eta=eta)
        self._unit = _PitCDF(target)

    def payoff(self, z) -> tuple[float, float]:
        return ew_payoffs(self.state, float(self.target.cdf(z)), self._unit)

    def observe(self, z) -> None:
        ew_update(self.state, float(self.target.cdf(z)), self._unit)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort + threshold)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("v must be a nonempty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, v.size + 1) > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class Chi2State:
    """State of the sequential chi-squared test on a finite alphabet."""

    def __init__(self, support: Sequence[Hashable], p: Sequence[float], mode: str = "plugin"):
        if mode not in ("plugin", "pgd"):
            raise ValueError("mode must be 'plugin' or 'pgd'")
        self.support = list(support)
        self.index = {x: i for i, x in enumerate(self.support)}
        self.p = np.asarray(p, dtype=float)
        if self.p.shape != (len(self.support),):
            raise ValueError("pmf length must match support")
        if np.any(self.p <= 0) or abs(self.p.sum() - 1.0) > 1e-9:
            raise ValueError("target pmf must be positive and sum to 1")
        self.counts = np.zeros(len(self.support), dtype=np.int64)
        self.c_p = 1.0 / self.p.min() - 1.0
        self.mode = mode
        self.m = len(self.support)
        self.q_pgd = np.full(self.m, 1.0 / self.m) if mode == "pgd" else None


def chi2_payoff(state: Chi2State, y: Hashable) -> float:
    """Scaled likelihood-ratio payoff (q_hat/p - 1) / C_P.

    An out-of-support symbol contradicts the null outright and raises
    :class:`OutOfSupport`.
    """
    idx = state.index.get(y)
    if idx is None:
        raise OutOfSupport(y)
    if state.mode == "pgd":
        q = state.q_pgd[idx]
    else:
        total = int(state.counts.sum())
        if total == 0:
            return 0.0
        q = state.counts[idx] / total
    return float((q / state.p[idx] - 1.0) / state.c_p)


def chi2_pgd_update(state: Chi2State, x: Hashable, t: int) -> Chi2State:
    """Projected gradient ascent step on the linear payoff reward."""
    if state.mode != "pgd":
        raise ValueError("pgd update requires pgd mode")
    idx = state.index.get(x)
    if idx is None:
        raise OutOfSupport(x)
    step = state.q_pgd.copy()
    step[idx] += math.sqrt(state.m / t) / (state.c_p * state.p[idx])
    state.q_pgd = project_simplex(step)
    return state


class Chi2Strategy(PayoffStrategy):
    """Sequential chi-squared strategy (plug-in or projected-gradient)."""

    bet_grid = ONE_SIDED_GRID

    def __init__(self, support: Sequence[Hashable], p: Sequence[float], mode: str = "plugin"):
        self.state = Chi2State(support, p, mode)
        self._t = 1

    def payoff(self, z) -> float:
        return chi2_payoff(self.state, z)

    def observe(self, z) -> None:
        idx = self.state.index.get(z)
        if idx is None:
            raise OutOfSupport(z)
        self.state.counts[idx] += 1
        self._t += 1
        if self.state.mode == "pgd":
            chi2_pgd_update(self.state, z, self._t)
