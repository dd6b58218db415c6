"""Metrics, distances, covariance estimation and direction sampling.

Everything else in the package goes through :class:`Metric` for distance
computations, so the L1 / L2 / Mahalanobis geometries stay interchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.spatial.distance import cdist

from .exceptions import DegenerateCovarianceError, DepthError, DimensionError

__all__ = [
    "Dataset",
    "Metric",
    "METRIC_KINDS",
    "SPD_RTOL",
    "as_matrix",
    "check_spd",
    "distance",
    "lower_median",
    "lower_quantile",
    "order_index",
    "sample_covariance",
    "sample_unit_directions",
]

METRIC_KINDS = ("l1", "l2", "mahalanobis")

# smallest eigenvalue must exceed SPD_RTOL * largest eigenvalue
SPD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ``n x d`` matrix of finite observations with column labels.

    The stored array is a read-only copy, so ``n`` and ``d`` cannot change
    after construction.
    """

    values: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DimensionError(f"dataset must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"dataset needs n >= 1 and d >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DepthError("dataset contains NaN or infinite entries")
        arr.setflags(write=False)
        labels = tuple(self.labels) if self.labels else tuple(
            f"x{j + 1}" for j in range(arr.shape[1]))
        if len(labels) != arr.shape[1]:
            raise DimensionError(
                f"{len(labels)} labels given for {arr.shape[1]} columns")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", tuple(str(s) for s in labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.n


def as_matrix(data) -> np.ndarray:
    """Return ``data`` (a :class:`Dataset` or array-like) as a 2-D float array."""
    if isinstance(data, Dataset):
        return data.values
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D array, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise DepthError("empty sample")
    if not np.all(np.isfinite(arr)):
        raise DepthError("sample contains NaN or infinite entries")
    return arr


def order_index(alpha: float, n: int) -> int:
    """Zero-based index of the ``ceil(alpha * n)``-th order statistic."""
    # rounding guards against 0.7 * 10 == 7.000000000000001
    k = math.ceil(round(alpha * n, 9))
    return min(max(k, 1), n) - 1


def lower_quantile(values, alpha: float, axis: int = -1):
    """The ``ceil(alpha * n)``-th order statistic along ``axis``.

    This realises ``inf{r : #(values <= r) / n >= alpha}``; no interpolation.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    if n == 0:
        raise DepthError("empty sample")
    k = order_index(alpha, n)
    return np.take(np.partition(values, k, axis=axis), k, axis=axis)


def lower_median(values, axis: int = -1):
    """Lower median: the ``ceil(n / 2)``-th order statistic."""
    return lower_quantile(values, 0.5, axis=axis)


def check_spd(shape, rtol: float = SPD_RTOL) -> np.ndarray:
    """Validate a symmetric positive-definite matrix and return it as floats."""
    shape = np.array(shape, dtype=float)
    if shape.ndim != 2 or shape.shape[0] != shape.shape[1]:
        raise DimensionError(f"shape matrix must be square, got {shape.shape}")
    if not np.all(np.isfinite(shape)):
        raise DegenerateCovarianceError("shape matrix has non-finite entries")
    scale = max(np.max(np.abs(shape)), np.finfo(float).tiny)
    if not np.allclose(shape, shape.T, rtol=0.0, atol=1e-12 * scale):
        raise DegenerateCovarianceError("shape matrix is not symmetric")
    eig = np.linalg.eigvalsh(shape)
    if eig[-1] <= 0 or eig[0] <= rtol * eig[-1]:
        raise DegenerateCovarianceError(
            "degenerate covariance: smallest eigenvalue "
            f"{eig[0]:.3g} <= {rtol:g} x largest {eig[-1]:.3g}; "
            "use the L2 metric or add a ridge to the shape matrix")
    return shape


@dataclass(frozen=True, eq=False)
class Metric:
    """Distance geometry: ``l1``, ``l2`` or ``mahalanobis`` with an SPD shape.

    Mahalanobis distances are computed by whitening with the lower Cholesky
    factor ``L`` of the shape matrix (``L^{-1}(x - y)``, then the L2 norm)
    instead of forming the inverse.
    """

    kind: str = "l2"
    shape: np.ndarray | None = None
    _chol: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in METRIC_KINDS:
            raise DepthError(f"unknown metric {self.kind!r}; expected one of {METRIC_KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "mahalanobis":
            if self.shape is None:
                raise DepthError("mahalanobis metric requires a shape matrix")
            shape = check_spd(self.shape)
            shape.setflags(write=False)
            object.__setattr__(self, "shape", shape)
            object.__setattr__(self, "_chol", cholesky(shape, lower=True))
        elif self.shape is not None:
            raise DepthError(f"{kind} metric does not take a shape matrix")

    @classmethod
    def l1(cls) -> "Metric":
        return cls("l1")

    @classmethod
    def l2(cls) -> "Metric":
        return cls("l2")

    @classmethod
    def mahalanobis(cls, shape) -> "Metric":
        return cls("mahalanobis", shape)

    @classmethod
    def from_name(cls, name: str, data=None, shape=None) -> "Metric":
        """Build a metric by name; Mahalanobis falls back to the sample covariance of ``data``."""
        name = str(name).lower()
        if name == "mahalanobis" and shape is None:
            if data is None:
                raise DepthError("mahalanobis metric needs data or a shape matrix")
            shape = sample_covariance(data)
        return cls(name, shape if name == "mahalanobis" else None)

    @property
    def d(self) -> int | None:
        return None if self.shape is None else self.shape.shape[0]

    def _check_dim(self, d: int):
        if self.shape is not None and d != self.shape.shape[0]:
            raise DimensionError(
                f"metric is {self.shape.shape[0]}-dimensional, data is {d}-dimensional")

    def whiten(self, points) -> np.ndarray:
        """Map points into coordinates where this metric is a plain L1/L2 norm."""
        points = np.asarray(points, dtype=float)
        if self.kind != "mahalanobis":
            return points
        self._check_dim(points.shape[-1])
        flat = points.reshape(-1, points.shape[-1])
        return solve_triangular(self._chol, flat.T, lower=True).T.reshape(points.shape)

    def norm(self, diffs) -> np.ndarray:
        """Norm of each row of ``diffs`` (last axis holds coordinates)."""
        diffs = self.whiten(diffs)
        if self.kind == "l1":
            return np.sum(np.abs(diffs), axis=-1)
        return np.sqrt(np.sum(diffs * diffs, axis=-1))

    def distances(self, v, points) -> np.ndarray:
        """Distances from the single point ``v`` to every row of ``points``."""
        points = as_matrix(points)
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != points.shape[1]:
            raise DimensionError(
                f"query has dimension {v.shape[0]}, data has {points.shape[1]}")
        return self.norm(points - v)

    def pairwise(self, a, b) -> np.ndarray:
        """Full ``len(a) x len(b)`` distance matrix."""
        a = as_matrix(a)
        b = as_matrix(b)
        if a.shape[1] != b.shape[1]:
            raise DimensionError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
        a = self.whiten(a)
        b = self.whiten(b)
        return cdist(a, b, "cityblock" if self.kind == "l1" else "euclidean")


def distance(x, y, metric: Metric) -> float:
    """Distance between two d-vectors under ``metric``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(metric.norm(x - y))


def sample_covariance(data) -> np.ndarray:
    """Unbiased (divisor ``n - 1``) sample covariance, checked for positive definiteness.

    Raises
    ------
    DegenerateCovarianceError
        If ``n < d + 1`` or the columns are (numerically) collinear.
    """
    x = as_matrix(data)
    n, d = x.shape
    if n < d + 1:
        raise DegenerateCovarianceError(
            f"degenerate covariance: n={n} < d+1={d + 1}; "
            "use the L2 metric or supply a ridge-regularised shape matrix")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    cov = 0.5 * (cov + cov.T)
    return check_spd(cov)


def sample_unit_directions(k: int, d: int, seed: int) -> np.ndarray:
    """``k`` directions uniform on the unit sphere in ``R^d`` (normalised Gaussians)."""
    if k < 1 or d < 1:
        raise DepthError(f"need k >= 1 and d >= 1, got k={k}, d={d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((k, d))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]
