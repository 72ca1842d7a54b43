"""Betting game engine: mixture-of-constant-bets wealth processes and the
sequential test driver.

The wealth of a constant bet fraction ``lam`` after observing payoffs
``f_1, ..., f_t`` is ``prod(1 + lam * f_i)``.  A mixture bet spreads the
initial unit wealth over a finite grid of fractions and reports the weighted
average wealth.  Per-fraction wealth is kept in log domain so that
exponential growth under the alternative never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "BetGrid",
    "WealthState",
    "HedgedWealthState",
    "CompoundedWealth",
    "TestOutcome",
    "OutOfSupport",
    "PayoffContractError",
    "PayoffStrategy",
    "make_uniform_grid",
    "should_stop",
    "run_sequential",
    "TWO_SIDED_GRID",
    "ONE_SIDED_GRID",
]


class OutOfSupport(Exception):
    """Observation falls outside the declared support: immediate rejection."""


class PayoffContractError(ValueError):
    """A strategy emitted a payoff violating its contract (range or sign)."""


@dataclass(frozen=True)
class BetGrid:
    """Discrete mixture of constant bet fractions.

    ``points`` are the bet fractions, each strictly inside (-1, 1) so that
    ``1 + lam * f`` stays positive for any payoff ``f`` in [-1, 1].
    ``weights`` are the mixture weights and must sum to one.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if points.ndim != 1 or weights.shape != points.shape:
            raise ValueError("points and weights must be 1-d and same length")
        if points.size == 0:
            raise ValueError("grid must contain at least one point")
        if np.any(np.abs(points) >= 1.0):
            raise ValueError("bet fractions must lie strictly inside (-1, 1)")
        if np.any(np.diff(points) <= 0):
            raise ValueError("bet fractions must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("mixture weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")

    @property
    def size(self) -> int:
        return self.points.size


def make_uniform_grid(n_points: int, lo: float, hi: float) -> BetGrid:
    """Equally spaced bet fractions from ``lo`` to ``hi`` with uniform weights."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if not (-1.0 < lo <= hi < 1.0):
        raise ValueError("need -1 < lo <= hi < 1 (endpoints allow zero wealth)")
    if n_points == 1:
        if lo != hi:
            raise ValueError("a single-point grid needs lo == hi")
        points = np.array([lo])
    else:
        points = np.linspace(lo, hi, n_points)
    weights = np.full(n_points, 1.0 / n_points)
    return BetGrid(points, weights)


# Default grids: two-sided for tests whose payoff sign is unknown, one-sided
# for payoffs known to be nonnegative in expectation under the alternative.
# The one-sided grid trims lam = 1 (a payoff of -1 would bankrupt that bet).
TWO_SIDED_GRID = make_uniform_grid(100, -0.9, 0.9)
ONE_SIDED_GRID = make_uniform_grid(100, 0.0, 0.999)


class WealthState:
    """Mixture-bet wealth accumulator over a :class:`BetGrid`."""

    __slots__ = ("grid", "log_wealth", "step", "payoff_sum", "_log_weights")

    def __init__(self, grid: BetGrid):
        self.grid = grid
        self.log_wealth = np.zeros(grid.size)
        self.step = 0
        self.payoff_sum = 0.0
        with np.errstate(divide="ignore"):
            self._log_weights = np.log(grid.weights)

    def update(self, payoff: float) -> None:
        """Apply one betting round with the given payoff in [-1, 1]."""
        if not (-1.0 <= payoff <= 1.0) or math.isnan(payoff):
            raise PayoffContractError(f"payoff {payoff!r} outside [-1, 1]")
        self.log_wealth += np.log1p(self.grid.points * payoff)
        self.step += 1
        self.payoff_sum += payoff

    def wealth(self) -> float:
        """Current mixture wealth sum_i w_i * exp(log_wealth_i)."""
        return float(np.exp(logsumexp(self._log_weights + self.log_wealth)))

    def log_mixture_wealth(self) -> float:
        return float(logsumexp(self._log_weights + self.log_wealth))


def wealth_update(state: WealthState, payoff: float) -> WealthState:
    state.update(payoff)
    return state


def wealth(state: WealthState) -> float:
    return state.wealth()


class HedgedWealthState:
    """Two-leg hedge: mix of a plus-leg and a minus-leg mixture wealth."""

    __slots__ = ("plus", "minus", "mix_weight")

    def __init__(self, grid: BetGrid, mix_weight: float = 0.5):
        if not (0.0 < mix_weight < 1.0):
            raise ValueError("mix_weight must lie in (0, 1)")
        self.plus = WealthState(grid)
        self.minus = WealthState(grid)
        self.mix_weight = mix_weight

    def update(self, payoff_plus: float, payoff_minus: float) -> None:
        self.plus.update(payoff_plus)
        self.minus.update(payoff_minus)

    def wealth(self) -> float:
        w = self.mix_weight
        return w * self.plus.wealth() + (1.0 - w) * self.minus.wealth()


def hedged_update(
    state: HedgedWealthState, payoff_plus: float, payoff_minus: float
) -> HedgedWealthState:
    state.update(payoff_plus, payoff_minus)
    return state


class CompoundedWealth:
    """Wealth for strategies that scale their own bet by current wealth.

    The emitted payoff already contains the wealth factor, so the process is
    additive: ``K_t = 1 + sum_i f_i``.  Used by the coin-betting strategy.
    """

    __slots__ = ("_wealth",)

    def __init__(self):
        self._wealth = 1.0

    def update(self, payoff: float) -> None:
        new = self._wealth + payoff
        if not new > 0.0:
            raise PayoffContractError(
                f"compounded payoff {payoff!r} would bankrupt wealth {self._wealth!r}"
            )
        self._wealth = new

    def wealth(self) -> float:
        return self._wealth


def should_stop(w: float, alpha: float) -> bool:
    """Ville threshold: stop as soon as wealth reaches 1/alpha (inclusive)."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return w >= 1.0 / alpha


@dataclass
class TestOutcome:
    """Result of one sequential test run.

    ``tau`` is the stopping step, or None when the run was censored at the
    horizon without a decision.
    """

    tau: Optional[int]
    rejected: bool
    final_wealth: float
    n_seen: int
    trajectory: Optional[list[tuple[int, float]]] = None


class PayoffStrategy:
    """Predictable payoff generator.

    ``payoff(z)`` must depend only on previously observed data; the driver
    calls it on the current observation *before* ``observe(z)`` records it.
    Standard strategies bet through a mixture grid; subclasses may override
    ``new_wealth`` to supply hedged or self-compounding wealth processes.
    """

    bet_grid: BetGrid = TWO_SIDED_GRID

    def new_wealth(self):
        return WealthState(self.bet_grid)

    def payoff(self, z):
        raise NotImplementedError

    def observe(self, z) -> None:
        raise NotImplementedError

    def apply(self, wealth_state, z) -> None:
        """Evaluate the payoff of ``z`` and update ``wealth_state``."""
        wealth_state.update(self.payoff(z))


class HedgedStrategyMixin:
    """Strategies emitting (plus, minus) payoff pairs for a hedged wealth."""

    def new_wealth(self):
        return HedgedWealthState(self.bet_grid)

    def apply(self, wealth_state, z) -> None:
        f_plus, f_minus = self.payoff(z)
        wealth_state.update(f_plus, f_minus)


def run_sequential(
    strategy: PayoffStrategy,
    stream: Iterable,
    alpha: float,
    n_max: int,
    record_trajectory: bool = False,
    checkpoint_cb: Optional[Callable[[int, float], None]] = None,
) -> TestOutcome:
    """Drive a payoff strategy against an observation stream.

    Stops at the first step where wealth reaches 1/alpha, or censors after
    ``n_max`` observations.  A strategy may raise :class:`OutOfSupport` to
    force an immediate rejection (observation incompatible with the null).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    threshold = 1.0 / alpha
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    state = strategy.new_wealth()
    trajectory: Optional[list[tuple[int, float]]] = [] if record_trajectory else None
    t = 0
    for z in stream:
        t += 1
        try:
            strategy.apply(state, z)
        except OutOfSupport:
            if trajectory is not None:
                trajectory.append((t, math.inf))
            return TestOutcome(t, True, math.inf, t, trajectory)
        strategy.observe(z)
        w = state.wealth()
        if trajectory is not None:
            trajectory.append((t, w))
        if checkpoint_cb is not None:
            checkpoint_cb(t, w)
        if w >= threshold:
            return TestOutcome(t, True, w, t, trajectory)
        if t >= n_max:
            break
    return TestOutcome(None, False, state.wealth(), t, trajectory)
