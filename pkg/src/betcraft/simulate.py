"""Monte Carlo harness: reproducible trial execution, power-curve
aggregation, and CSV output.

Child RNGs are derived with ``SeedSequence(entropy=master_seed,
spawn_key=(trial,))`` — a fixed counter-based splitting rule, so results are
identical no matter how trials are scheduled across workers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import baselines, distributions
from .baselines import (
    dr_threshold_1s,
    dr_threshold_2s,
    hr_threshold_1s,
    hr_threshold_2s,
)
from .betting import run_sequential
from .distributions import DistSpec, as_target_cdf, sample_block, stream
from .extensions import DominanceStrategy, SymmetryStrategy
from .kernels import GaussianKernel
from .one_sample import Chi2Strategy, EWKSStrategy, KS1PluginStrategy
from .two_sample import KS2PluginStrategy, KTMMDStrategy, MMDPluginStrategy

__all__ = [
    "ExperimentConfig",
    "PowerCurve",
    "TrialResult",
    "TRIAL_RUNNERS",
    "default_checkpoints",
    "trial_rng",
    "run_trials",
    "write_csv",
    "write_stopping_times",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment: a test identifier, data-generating
    distributions, and trial bookkeeping."""

    test: str
    null: tuple[DistSpec, ...]
    alternative: tuple[DistSpec, ...]
    alpha: float = 0.05
    n_max: int = 10_000
    n_trials: int = 200
    checkpoints: Optional[tuple[int, ...]] = None
    master_seed: int = 0
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "null", tuple(self.null))
        object.__setattr__(self, "alternative", tuple(self.alternative))
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_max < 1 or self.n_trials < 1:
            raise ValueError("n_max and n_trials must be >= 1")
        if self.checkpoints is not None:
            cps = tuple(int(c) for c in self.checkpoints)
            object.__setattr__(self, "checkpoints", cps)
            if any(not 1 <= c <= self.n_max for c in cps) or list(cps) != sorted(set(cps)):
                raise ValueError("checkpoints must be distinct, sorted, within [1, n_max]")

    def effective_checkpoints(self) -> tuple[int, ...]:
        if self.checkpoints is not None:
            return self.checkpoints
        return default_checkpoints(self.n_max)


def default_checkpoints(n_max: int, n_points: int = 50) -> tuple[int, ...]:
    """Log-spaced step grid from 1 to n_max (deduplicated)."""
    pts = np.unique(np.round(np.logspace(0.0, math.log10(n_max), n_points)).astype(int))
    return tuple(int(p) for p in pts[(pts >= 1) & (pts <= n_max)])


@dataclass(frozen=True)
class TrialResult:
    """Outcome of a single trial: a stopping time for sequential tests, a
    per-checkpoint reject vector for batch tests, or an error message."""

    tau: Optional[int] = None
    rejects: Optional[tuple[bool, ...]] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class PowerCurve:
    """Per-checkpoint rejection fractions with Monte Carlo standard errors,
    plus the per-trial stopping times (empty for batch tests)."""

    checkpoints: tuple[int, ...]
    reject_fraction: tuple[float, ...]
    stderr: tuple[float, ...]
    taus: tuple[Optional[int], ...]
    n_max: int
    n_trials: int
    n_errors: int

    @property
    def censored(self) -> int:
        return sum(1 for t in self.taus if t is None)

    @property
    def mean_tau(self) -> Optional[float]:
        """Mean stopping time over stopped trials; censored trials excluded."""
        stopped = [t for t in self.taus if t is not None]
        if not stopped:
            return None
        return sum(stopped) / len(stopped)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial generator from a fixed splitting rule."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    )


# ---------------------------------------------------------------------------
# Trial runners.  Each maps (config, rng) -> TrialResult.  One-sample tests
# stream from alternative[0] and treat null[0] as the known target; two-sample
# tests pair a null[0] stream (X) with an alternative[0] stream (Y).
# ---------------------------------------------------------------------------


def _one_stream(config: ExperimentConfig, rng: np.random.Generator):
    return stream(config.alternative[0], rng, config.n_max)


def _pair_stream(config: ExperimentConfig, rng: np.random.Generator):
    return zip(
        stream(config.null[0], rng, config.n_max),
        stream(config.alternative[0], rng, config.n_max),
    )


def _target(config: ExperimentConfig):
    return as_target_cdf(config.null[0])


def _kernel(config: ExperimentConfig) -> GaussianKernel:
    return GaussianKernel(float(config.params.get("bandwidth", 1.0)))


def _discrete_null(config: ExperimentConfig) -> distributions.Discrete:
    spec = config.null[0]
    if not isinstance(spec, distributions.Discrete):
        raise ValueError("chi-squared tests need a discrete null spec")
    return spec


def _sequential(strategy_factory, stream_factory):
    def run(config: ExperimentConfig, rng: np.random.Generator) -> TrialResult:
        outcome = run_sequential(
            strategy_factory(config), stream_factory(config, rng), config.alpha, config.n_max
        )
        return TrialResult(tau=outcome.tau)

    return run


def _run_ks1(config, rng):
    return _sequential(
        lambda c: KS1PluginStrategy(_target(c), int(c.params.get("grid_cap", 5000))),
        _one_stream,
    )(config, rng)


def _run_ks1_ew(config, rng):
    return _sequential(
        lambda c: EWKSStrategy(_target(c), int(c.params.get("n_grid", 512))), _one_stream
    )(config, rng)


def _run_chi2(config, rng):
    spec = _discrete_null(config)
    return _sequential(
        lambda c: Chi2Strategy(spec.support, spec.pmf, mode="plugin"), _one_stream
    )(config, rng)


def _run_chi2_pgd(config, rng):
    spec = _discrete_null(config)
    return _sequential(
        lambda c: Chi2Strategy(spec.support, spec.pmf, mode="pgd"), _one_stream
    )(config, rng)


def _run_ks2(config, rng):
    return _sequential(
        lambda c: KS2PluginStrategy(int(c.params.get("grid_cap", 5000))), _pair_stream
    )(config, rng)


def _run_mmd(config, rng):
    return _sequential(lambda c: MMDPluginStrategy(_kernel(c)), _pair_stream)(config, rng)


def _run_mmd_kt(config, rng):
    return _sequential(lambda c: KTMMDStrategy(_kernel(c)), _pair_stream)(config, rng)


def _run_dominance(config, rng):
    return _sequential(
        lambda c: DominanceStrategy(int(c.params.get("n_grid", 512))), _pair_stream
    )(config, rng)


def _run_symmetry(config, rng):
    return _sequential(
        lambda c: SymmetryStrategy(int(c.params.get("n_grid", 512))), _one_stream
    )(config, rng)


def _run_seq_ks1(threshold_fn):
    def run(config, rng):
        res = baselines.seq_ks1(
            _one_stream(config, rng), _target(config), config.alpha, config.n_max, threshold_fn
        )
        return TrialResult(tau=res.tau)

    return run


def _run_seq_ks2(threshold_fn):
    def run(config, rng):
        res = baselines.seq_ks2(_pair_stream(config, rng), config.alpha, config.n_max, threshold_fn)
        return TrialResult(tau=res.tau)

    return run


def _run_mr_mmd(config, rng):
    res = baselines.mr_mmd_sequential(
        _pair_stream(config, rng), _kernel(config), config.alpha, config.n_max
    )
    return TrialResult(tau=res.tau)


def _run_br(config, rng):
    res = baselines.br_sequential(
        _pair_stream(config, rng), _kernel(config), config.alpha, config.n_max
    )
    return TrialResult(tau=res.tau)


def _one_block(config, rng) -> np.ndarray:
    data = sample_block(config.alternative[0], rng, config.n_max)
    return data if isinstance(data, list) else np.asarray(data)


def _pair_block(config, rng):
    xs = sample_block(config.null[0], rng, config.n_max)
    ys = sample_block(config.alternative[0], rng, config.n_max)
    return np.asarray(xs), np.asarray(ys)


def _run_batch_ks1(config, rng):
    data = _one_block(config, rng)
    target = _target(config)
    cps = config.effective_checkpoints()
    return TrialResult(
        rejects=tuple(baselines.batch_ks1(data[:n], target, config.alpha).reject for n in cps)
    )


def _run_batch_ks2(config, rng):
    xs, ys = _pair_block(config, rng)
    cps = config.effective_checkpoints()
    return TrialResult(
        rejects=tuple(baselines.batch_ks2(xs[:n], ys[:n], config.alpha).reject for n in cps)
    )


def _run_batch_chi2(config, rng):
    spec = _discrete_null(config)
    index = {x: i for i, x in enumerate(spec.support)}
    data = sample_block(config.alternative[0], rng, config.n_max)
    idx = np.array([index[z] for z in data])
    cps = config.effective_checkpoints()
    rejects = []
    for n in cps:
        counts = np.bincount(idx[:n], minlength=len(spec.support))
        rejects.append(baselines.batch_chi2(counts, spec.pmf, config.alpha).reject)
    return TrialResult(rejects=tuple(rejects))


def _run_batch_mmd(config, rng):
    xs, ys = _pair_block(config, rng)
    k = _kernel(config)
    n_boot = int(config.params.get("n_boot", 1000))
    cps = config.effective_checkpoints()
    rejects = tuple(
        baselines.batch_mmd(xs[:n], ys[:n], k, config.alpha, n_boot=n_boot, rng=rng).reject
        for n in cps
    )
    return TrialResult(rejects=rejects)


TRIAL_RUNNERS: dict[str, Callable[[ExperimentConfig, np.random.Generator], TrialResult]] = {
    "ks1": _run_ks1,
    "ks1_ew": _run_ks1_ew,
    "chi2": _run_chi2,
    "chi2_pgd": _run_chi2_pgd,
    "ks2": _run_ks2,
    "mmd": _run_mmd,
    "mmd_kt": _run_mmd_kt,
    "dominance": _run_dominance,
    "symmetry": _run_symmetry,
    "seq_ks1_hr": _run_seq_ks1(hr_threshold_1s),
    "seq_ks1_dr": _run_seq_ks1(dr_threshold_1s),
    "seq_ks2_hr": _run_seq_ks2(hr_threshold_2s),
    "seq_ks2_dr": _run_seq_ks2(dr_threshold_2s),
    "mr_mmd": _run_mr_mmd,
    "br": _run_br,
    "batch_ks1": _run_batch_ks1,
    "batch_ks2": _run_batch_ks2,
    "batch_chi2": _run_batch_chi2,
    "batch_mmd": _run_batch_mmd,
}


def _worker(args: tuple[ExperimentConfig, int]) -> TrialResult:
    config, trial = args
    rng = trial_rng(config.master_seed, trial)
    try:
        return TRIAL_RUNNERS[config.test](config, rng)
    except KeyError:
        raise
    except Exception as exc:  # per-trial failures are recorded, not fatal
        return TrialResult(error=f"{type(exc).__name__}: {exc}")


def run_trials(config: ExperimentConfig, jobs: int = 1) -> PowerCurve:
    """Run ``config.n_trials`` independent trials and aggregate a power curve.

    Results are bit-identical for any ``jobs`` value: every trial owns its
    seed and aggregation follows trial order.
    """
    if config.test not in TRIAL_RUNNERS:
        raise ValueError(
            f"unknown test {config.test!r}; known: {sorted(TRIAL_RUNNERS)}"
        )
    tasks = [(config, i) for i in range(config.n_trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_worker(t) for t in tasks]

    ok = [r for r in results if r.error is None]
    n_errors = len(results) - len(ok)
    for r in results:
        if r.error is not None:
            warnings.warn(f"trial errored and was excluded: {r.error}", stacklevel=2)
    if not ok:
        raise RuntimeError("all trials errored")

    cps = config.effective_checkpoints()
    if all(r.rejects is not None for r in ok):  # batch test
        mat = np.array([r.rejects for r in ok], dtype=float)
        frac = mat.mean(axis=0)
        taus: tuple[Optional[int], ...] = ()
    else:
        taus = tuple(r.tau for r in ok)
        frac = np.array(
            [sum(1 for t in taus if t is not None and t <= n) / len(taus) for n in cps]
        )
    err = np.sqrt(frac * (1.0 - frac) / len(ok))
    return PowerCurve(
        checkpoints=cps,
        reject_fraction=tuple(float(f) for f in frac),
        stderr=tuple(float(e) for e in err),
        taus=taus,
        n_max=config.n_max,
        n_trials=config.n_trials,
        n_errors=n_errors,
    )


def _fmt(v: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(v))


def write_csv(curve: PowerCurve, path) -> None:
    """Power-curve CSV: header ``n,reject_fraction,stderr``, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,reject_fraction,stderr\n")
        for n, p, e in zip(curve.checkpoints, curve.reject_fraction, curve.stderr):
            fh.write(f"{n},{_fmt(p)},{_fmt(e)}\n")


def write_stopping_times(times: Sequence[Optional[int]], path) -> None:
    """Stopping-time CSV: header ``trial,tau,censored``; censored trials get
    an empty tau field."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("trial,tau,censored\n")
        for i, tau in enumerate(times):
            if tau is None:
                fh.write(f"{i},,1\n")
            else:
                fh.write(f"{i},{int(tau)},0\n")
