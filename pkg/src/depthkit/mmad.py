"""Multivariate moving MAD (3MAD): scale field, depth, central regions, shells.

``phi(v)`` is the lower median of the distances ``||X_i - v||`` under a
chosen :class:`~depthkit.geometry.Metric`.  The depth of ``v`` is the fraction
of sample points whose own ``phi`` is strictly larger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DepthError, DimensionError
from .geometry import Metric, as_matrix, lower_median, lower_quantile, order_index

__all__ = [
    "CentralRegion",
    "ContourGrid",
    "DepthVector",
    "FIGURE1_LEVELS",
    "ShellAssignment",
    "central_region",
    "contour_grid",
    "depth_3mad",
    "depth_from_scale",
    "phi_field",
    "phi_scale",
    "shell_assign",
]

FIGURE1_LEVELS = (0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95)

# cap on the number of distance-matrix entries held at once
_BLOCK_ENTRIES = 4_000_000


def phi_scale(v, data, metric: Metric) -> float:
    """``phi(v)``: lower median of the distances from ``v`` to the sample.

    One pass over the distances plus a selection, ``O(n d)`` for L1/L2.
    """
    x = as_matrix(data)
    return float(lower_median(metric.distances(v, x)))


def phi_field(points, data, metric: Metric) -> np.ndarray:
    """``phi`` evaluated at every row of ``points`` (blocked to bound memory)."""
    x = as_matrix(data)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1) if x.shape[1] > 1 else pts[:, None]
    if pts.shape[1] != x.shape[1]:
        raise DimensionError(f"points have dimension {pts.shape[1]}, data has {x.shape[1]}")
    n = x.shape[0]
    k = order_index(0.5, n)
    wx = metric.whiten(x)
    wp = metric.whiten(pts)
    plain = Metric("l1" if metric.kind == "l1" else "l2")
    out = np.empty(pts.shape[0])
    step = max(1, _BLOCK_ENTRIES // n)
    for start in range(0, pts.shape[0], step):
        dist = plain.pairwise(wp[start:start + step], wx)
        out[start:start + step] = np.partition(dist, k, axis=1)[:, k]
    return out


def depth_from_scale(phi_sample, phi_query) -> np.ndarray:
    """``#{i : phi_i > q} / n`` for each query scale value ``q``."""
    ref = np.sort(np.asarray(phi_sample, dtype=float))
    q = np.asarray(phi_query, dtype=float)
    return (ref.size - np.searchsorted(ref, q, side="right")) / ref.size


@dataclass(frozen=True, eq=False)
class DepthVector:
    """Per-observation 3MAD scale and depth, plus optional query results."""

    phi: np.ndarray
    depth: np.ndarray
    query_phi: np.ndarray | None = None
    query_depth: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.phi.size

    def ranks(self) -> np.ndarray:
        """Center-outward rank (1 = deepest); ties share the smallest rank."""
        order = np.sort(self.phi)
        return np.searchsorted(order, self.phi, side="left") + 1


def depth_3mad(data, metric: Metric, queries=None) -> DepthVector:
    """3MAD scale and depth for every observation and, optionally, query points.

    Queries are ranked against the sample scale values without being added
    to the sample.
    """
    x = as_matrix(data)
    if x.shape[0] < 2:
        raise DepthError("3MAD depth needs n >= 2 observations")
    phi = phi_field(x, x, metric)
    depth = depth_from_scale(phi, phi)
    qphi = qdepth = None
    if queries is not None:
        q = np.asarray(queries, dtype=float)
        if q.ndim == 1:
            q = q.reshape(1, -1) if x.shape[1] > 1 else q[:, None]
        qphi = phi_field(q, x, metric)
        qdepth = depth_from_scale(phi, qphi)
    return DepthVector(phi=phi, depth=depth, query_phi=qphi, query_depth=qdepth)


@dataclass(frozen=True, eq=False)
class CentralRegion:
    """Observations with scale at most the lower ``alpha``-quantile ``q_alpha``."""

    alpha: float
    radius_threshold: float
    member_indices: np.ndarray

    @property
    def size(self) -> int:
        return self.member_indices.size


def _scores(dv) -> np.ndarray:
    if isinstance(dv, DepthVector):
        return dv.phi
    return np.asarray(dv, dtype=float).reshape(-1)


def central_region(dv, alpha: float) -> CentralRegion:
    """The sample central region ``{i : phi_i <= q_alpha}``.

    ``dv`` is a :class:`DepthVector` or any array of outlyingness scores
    (smaller means more central).
    """
    if not 0.0 < alpha < 1.0:
        raise DepthError(f"alpha must lie in (0, 1), got {alpha}")
    phi = _scores(dv)
    q = float(lower_quantile(phi, alpha))
    members = np.flatnonzero(phi <= q)
    return CentralRegion(alpha=float(alpha), radius_threshold=q, member_indices=members)


@dataclass(frozen=True, eq=False)
class ShellAssignment:
    """Partition of the sample into ``len(levels) + 1`` nested-quantile shells."""

    levels: tuple
    thresholds: np.ndarray
    shell_index: np.ndarray

    def sizes(self) -> np.ndarray:
        return np.bincount(self.shell_index, minlength=len(self.levels) + 1)


def shell_assign(dv, levels=FIGURE1_LEVELS) -> ShellAssignment:
    """Assign shell ``j`` when ``q_{alpha_j} < phi <= q_{alpha_{j+1}}`` (shell 0 is innermost)."""
    levels = tuple(float(a) for a in levels)
    if not levels:
        raise DepthError("at least one level is required")
    if any(not 0.0 < a < 1.0 for a in levels):
        raise DepthError(f"levels must lie in (0, 1), got {levels}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DepthError(f"levels must be strictly increasing, got {levels}")
    phi = _scores(dv)
    thresholds = np.array([lower_quantile(phi, a) for a in levels])
    shell = np.searchsorted(thresholds, phi, side="left")
    return ShellAssignment(levels=levels, thresholds=thresholds, shell_index=shell)


@dataclass(frozen=True, eq=False)
class ContourGrid:
    """Scale or depth values on a regular 2-D grid; ``values[j, i]`` sits at ``(x_axis[i], y_axis[j])``."""

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray
    field_kind: str

    def rows(self):
        """Yield ``(x, y, value)`` in y-major order."""
        for j, y in enumerate(self.y_axis):
            for i, x in enumerate(self.x_axis):
                yield float(x), float(y), float(self.values[j, i])


def contour_grid(data, metric: Metric, bounds, resolution=(50, 50),
                 field_kind: str = "scale") -> ContourGrid:
    """Evaluate ``phi`` (``field_kind='scale'``) or 3MAD depth over a 2-D box.

    ``bounds`` is ``(xmin, xmax, ymin, ymax)``.
    """
    x = as_matrix(data)
    if x.shape[1] != 2:
        raise DimensionError(f"contour grids need 2-D data, got d={x.shape[1]}")
    if field_kind not in ("scale", "depth"):
        raise DepthError(f"field_kind must be 'scale' or 'depth', got {field_kind!r}")
    nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise DepthError("resolution must be at least 2 x 2")
    xmin, xmax, ymin, ymax = (float(b) for b in bounds)
    if not (xmin < xmax and ymin < ymax):
        raise DepthError(f"invalid bounds {bounds}")
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    values = phi_field(nodes, x, metric)
    if field_kind == "depth":
        values = depth_from_scale(phi_field(x, x, metric), values)
    return ContourGrid(x_axis=xs, y_axis=ys, values=values.reshape(ny, nx), field_kind=field_kind)
