"""Synthetic data generators for the simulation harness.

All sampling is inverse-CDF on top of ``rng.random()`` so that a fixed seed
yields the same stream on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtri

from .target import DiscreteCDF, NormalCDF, TargetCDF, UniformCDF

__all__ = [
    "Normal",
    "MVNormal",
    "Uniform",
    "Discrete",
    "Piecewise",
    "DistSpec",
    "sample",
    "sample_block",
    "stream",
    "make_q_j_eps",
    "as_target_cdf",
    "spec_from_dict",
    "spec_to_dict",
]


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class MVNormal:
    """Multivariate normal with identity covariance."""

    mean: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mean", tuple(float(v) for v in self.mean))

    @property
    def dim(self) -> int:
        return len(self.mean)


@dataclass(frozen=True)
class Uniform:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")


@dataclass(frozen=True)
class Discrete:
    support: tuple
    pmf: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "pmf", tuple(float(v) for v in self.pmf))
        p = np.asarray(self.pmf)
        if len(self.support) != p.size:
            raise ValueError("support and pmf lengths differ")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("pmf must be nonnegative and sum to 1")


@dataclass(frozen=True)
class Piecewise:
    """Piecewise-constant density on consecutive intervals."""

    breakpoints: tuple[float, ...]
    densities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(v) for v in self.breakpoints))
        object.__setattr__(self, "densities", tuple(float(v) for v in self.densities))
        bp = np.asarray(self.breakpoints)
        de = np.asarray(self.densities)
        if bp.size != de.size + 1 or np.any(np.diff(bp) <= 0) or np.any(de < 0):
            raise ValueError("need increasing breakpoints and one density per interval")
        if abs(float(np.sum(de * np.diff(bp))) - 1.0) > 1e-9:
            raise ValueError("densities must integrate to 1")


DistSpec = Union[Normal, MVNormal, Uniform, Discrete, Piecewise]


def sample_block(spec: DistSpec, rng: np.random.Generator, size: int):
    """Draw ``size`` observations as an array (or list, for discrete symbols)."""
    u = rng.random(size)
    if isinstance(spec, Normal):
        return spec.mu + spec.sigma * ndtri(u)
    if isinstance(spec, MVNormal):
        u = rng.random((size, spec.dim))
        return np.asarray(spec.mean) + ndtri(u)
    if isinstance(spec, Uniform):
        return spec.a + (spec.b - spec.a) * u
    if isinstance(spec, Discrete):
        cum = np.cumsum(spec.pmf)
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(spec.support) - 1)
        return [spec.support[i] for i in idx]
    if isinstance(spec, Piecewise):
        bp = np.asarray(spec.breakpoints)
        widths = np.diff(bp)
        masses = np.asarray(spec.densities) * widths
        cum = np.concatenate(([0.0], np.cumsum(masses)))
        cum[-1] = 1.0
        seg = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, widths.size - 1)
        frac = (u - cum[seg]) / masses[seg]
        return bp[seg] + frac * widths[seg]
    raise TypeError(f"unknown distribution spec {spec!r}")


def sample(spec: DistSpec, rng: np.random.Generator):
    """Draw one observation."""
    return sample_block(spec, rng, 1)[0]


def stream(spec: DistSpec, rng: np.random.Generator, n: int, block: int = 1024):
    """Lazily yield ``n`` observations, drawn in blocks."""
    produced = 0
    while produced < n:
        take = min(block, n - produced)
        for z in sample_block(spec, rng, take):
            yield z
        produced += take


def make_q_j_eps(m: int, j: int, eps: float, rng: np.random.Generator) -> Discrete:
    """Perturbed-uniform pmf: +eps on a random j-set, -eps on a disjoint one."""
    if not 1 <= j <= m // 2:
        raise ValueError("need 1 <= j <= floor(m / 2)")
    if not 0.0 < eps < 1.0 / m:
        raise ValueError("need 0 < eps < 1/m")
    symbols = rng.permutation(m)
    q = np.full(m, 1.0 / m)
    q[symbols[:j]] += eps
    q[symbols[j : 2 * j]] -= eps
    return Discrete(support=tuple(range(m)), pmf=tuple(q))


def as_target_cdf(spec: DistSpec) -> TargetCDF:
    """Known-target CDF for the one-sample tests."""
    if isinstance(spec, Normal):
        return NormalCDF(spec.mu, spec.sigma)
    if isinstance(spec, Uniform):
        return UniformCDF(spec.a, spec.b)
    if isinstance(spec, Discrete):
        return DiscreteCDF(spec.support, spec.pmf)
    if isinstance(spec, Piecewise):
        return _PiecewiseCDF(spec)
    raise TypeError(f"no scalar CDF for {spec!r}")


class _PiecewiseCDF(TargetCDF):
    def __init__(self, spec: Piecewise):
        self._bp = np.asarray(spec.breakpoints)
        self._de = np.asarray(spec.densities)
        self._cum = np.concatenate(([0.0], np.cumsum(self._de * np.diff(self._bp))))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        seg = np.clip(np.searchsorted(self._bp, x, side="right") - 1, 0, self._de.size - 1)
        inside = self._cum[seg] + self._de[seg] * (x - self._bp[seg])
        return np.clip(inside, 0.0, 1.0)


_KIND_TO_CLS = {
    "normal": Normal,
    "mvnormal": MVNormal,
    "uniform": Uniform,
    "discrete": Discrete,
    "piecewise": Piecewise,
}
_CLS_TO_KIND = {v: k for k, v in _KIND_TO_CLS.items()}

_FIELDS = {
    Normal: ("mu", "sigma"),
    MVNormal: ("mean",),
    Uniform: ("a", "b"),
    Discrete: ("support", "pmf"),
    Piecewise: ("breakpoints", "densities"),
}


def spec_from_dict(d: dict) -> DistSpec:
    """Parse a JSON-style description; unknown kinds or keys are rejected."""
    if "kind" not in d:
        raise ValueError("distribution spec needs a 'kind' key")
    kind = d["kind"]
    cls = _KIND_TO_CLS.get(kind)
    if cls is None:
        raise ValueError(f"unknown distribution kind {kind!r}")
    allowed = set(_FIELDS[cls])
    extra = set(d) - allowed - {"kind"}
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)} for kind {kind!r}")
    return cls(**{k: v for k, v in d.items() if k != "kind"})


def spec_to_dict(spec: DistSpec) -> dict:
    d = {"kind": _CLS_TO_KIND[type(spec)]}
    for name in _FIELDS[type(spec)]:
        value = getattr(spec, name)
        d[name] = list(value) if isinstance(value, tuple) else value
    return d
