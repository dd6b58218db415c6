"""One-dimensional moving MAD: ``G(v) = Med|X - v|`` and its depth and derivatives.

Empirical quantities use the lower median (the ``ceil(n/2)``-th order
statistic), which realises ``inf{r : P(|X - v| <= r) >= 1/2}`` exactly.
Population quantities are computed from a :class:`DensityModel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .exceptions import DegenerateError, DepthError
from .geometry import lower_median

__all__ = [
    "DensityModel",
    "Subdifferential",
    "UnivariateSample",
    "boundary_mass_balance",
    "depth_univariate",
    "g_derivative",
    "g_scale",
    "g_scale_population",
    "g_subdifferential",
]

_TINY_DENSITY = 1e-300


@dataclass(frozen=True, eq=False)
class UnivariateSample:
    """Sorted, finite, read-only sample of reals."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.sort(np.asarray(self.values, dtype=float).reshape(-1))
        if arr.size == 0:
            raise DepthError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise DepthError("sample contains NaN or infinite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.n


def _values(s) -> np.ndarray:
    if isinstance(s, UnivariateSample):
        return s.values
    return UnivariateSample(s).values


@dataclass(frozen=True)
class DensityModel:
    """A continuous reference distribution with pdf, cdf and quantile function.

    Use the constructors :meth:`normal`, :meth:`exponential` and
    :meth:`uniform`; the distribution is backed by :mod:`scipy.stats`.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in ("normal", "exponential", "uniform"):
            raise DepthError(f"unknown density model {self.kind!r}")
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "normal" and (len(p) != 2 or p[1] <= 0):
            raise DepthError("normal model needs (mu, sigma) with sigma > 0")
        if self.kind == "exponential" and (len(p) != 1 or p[0] <= 0):
            raise DepthError("exponential model needs (rate,) with rate > 0")
        if self.kind == "uniform" and (len(p) != 2 or p[1] <= p[0]):
            raise DepthError("uniform model needs (a, b) with a < b")

    @classmethod
    def normal(cls, mu: float = 0.0, sigma: float = 1.0) -> "DensityModel":
        return cls("normal", (mu, sigma))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "DensityModel":
        return cls("exponential", (rate,))

    @classmethod
    def uniform(cls, a: float = 0.0, b: float = 1.0) -> "DensityModel":
        return cls("uniform", (a, b))

    @property
    def dist(self):
        p = self.params
        if self.kind == "normal":
            return stats.norm(loc=p[0], scale=p[1])
        if self.kind == "exponential":
            return stats.expon(scale=1.0 / p[0])
        return stats.uniform(loc=p[0], scale=p[1] - p[0])

    # closed forms keep the per-call cost low inside bisection loops
    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "normal":
            z = (x - p[0]) / p[1]
            return np.exp(-0.5 * z * z) / (p[1] * math.sqrt(2.0 * math.pi))
        if self.kind == "exponential":
            return np.where(x >= 0, p[0] * np.exp(-p[0] * np.maximum(x, 0.0)), 0.0)
        return np.where((x >= p[0]) & (x <= p[1]), 1.0 / (p[1] - p[0]), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "normal":
            return special.ndtr((x - p[0]) / p[1])
        if self.kind == "exponential":
            return -np.expm1(-p[0] * np.maximum(x, 0.0))
        return np.clip((x - p[0]) / (p[1] - p[0]), 0.0, 1.0)

    def quantile(self, q):
        return self.dist.ppf(q)

    @property
    def median(self) -> float:
        return float(self.quantile(0.5))

    @property
    def mean(self) -> float:
        return float(self.dist.mean())

    @property
    def std(self) -> float:
        return float(self.dist.std())


@dataclass(frozen=True)
class Subdifferential:
    """One-sided derivatives ``(G'_-(v), G'_+(v))`` estimated from a sample."""

    lower: float
    upper: float

    def __iter__(self):
        return iter((self.lower, self.upper))


def g_scale(v, s):
    """Empirical moving MAD ``G(v)``: lower median of ``|X_i - v|``.

    ``v`` may be a scalar or an array of query points; the result has the
    same shape.
    """
    x = _values(s)
    v_arr = np.asarray(v, dtype=float)
    flat = v_arr.reshape(-1)
    out = np.empty(flat.size)
    step = max(1, int(4_000_000 // x.size))
    for start in range(0, flat.size, step):
        block = flat[start:start + step]
        out[start:start + step] = lower_median(np.abs(x[None, :] - block[:, None]), axis=1)
    if v_arr.ndim == 0:
        return float(out[0])
    return out.reshape(v_arr.shape)


def g_scale_population(v: float, dm: DensityModel, tol: float = 1e-10) -> float:
    """Population ``G(v)``: the root of ``F(v + G) - F(v - G) = 1/2`` by bisection.

    The upper bracket grows geometrically until it encloses half the mass;
    the returned value is the smallest such radius to within ``tol``.
    """
    v = float(v)
    if not math.isfinite(v):
        raise DepthError("v must be finite")

    def mass(r):
        return float(dm.cdf(v + r) - dm.cdf(v - r))

    hi = max(1.0, dm.std)
    while mass(hi) < 0.5:
        hi *= 2.0
        if hi > 1e300:
            raise DegenerateError("could not bracket the half-mass radius")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mass(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _boundary_densities(v: float, dm: DensityModel):
    g = g_scale_population(v, dm)
    f_left = float(dm.pdf(v - g))
    f_right = float(dm.pdf(v + g))
    if f_left < _TINY_DENSITY and f_right < _TINY_DENSITY:
        raise DegenerateError(
            f"degenerate boundary: density vanishes at both v - G and v + G (v={v})")
    return f_left, f_right


def g_derivative(v: float, dm: DensityModel) -> float:
    """Closed-form ``G'(v) = (f(v-G) - f(v+G)) / (f(v-G) + f(v+G))``."""
    f_left, f_right = _boundary_densities(v, dm)
    return (f_left - f_right) / (f_left + f_right)


def boundary_mass_balance(v: float, dm: DensityModel) -> float:
    """``P(X <= v | |X - v| = G(v)) = f(v-G) / (f(v-G) + f(v+G))``.

    Identically equal to ``(1 + G'(v)) / 2``.
    """
    f_left, f_right = _boundary_densities(v, dm)
    return f_left / (f_left + f_right)


def g_subdifferential(v: float, s) -> Subdifferential:
    """Empirical one-sided derivative formulas with weak inequalities.

    ``lower = P(X >= v+G) - P(X <= v-G)`` and
    ``upper = P(X >= v-G) - P(X <= v+G)`` with ``G = g_scale(v, s)``.
    Note ``lower - upper`` equals the sample mass at ``v+G`` minus the mass
    at ``v-G``, so the pair is not ordered in general.
    """
    x = _values(s)
    v = float(v)
    g = g_scale(v, x)
    n = x.size
    hi_edge = v + g
    lo_edge = v - g
    ge_hi = n - np.searchsorted(x, hi_edge, side="left")
    le_lo = np.searchsorted(x, lo_edge, side="right")
    ge_lo = n - np.searchsorted(x, lo_edge, side="left")
    le_hi = np.searchsorted(x, hi_edge, side="right")
    return Subdifferential(lower=float((ge_hi - le_lo) / n), upper=float((ge_lo - le_hi) / n))


def depth_univariate(queries, s):
    """Moving-MAD depth ``#{i : G(X_i) > G(v)} / n`` for each query ``v``."""
    x = _values(s)
    g_sample = np.sort(g_scale(x, x))
    q = np.asarray(queries, dtype=float)
    g_query = np.asarray(g_scale(q, x))
    n = x.size
    depth = (n - np.searchsorted(g_sample, g_query, side="right")) / n
    if q.ndim == 0:
        return float(depth)
    return depth
