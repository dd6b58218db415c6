"""Classical depth functions: Tukey (halfspace), simplicial, spatial and projection.

Tukey and simplicial depth are exact in the plane via an angular sweep
around the query point (``O(n log n)`` per query), with exact handling of
collinear and antipodal points.  For ``d > 2`` Tukey depth
is approximated by minimising over sampled directions.  The ``*_oracle``
functions are slow brute-force versions built on orientation predicates,
kept for verification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .exceptions import DegenerateError, DepthError, DimensionError
from .geometry import Metric, as_matrix, lower_median, sample_unit_directions

__all__ = [
    "METHODS",
    "DepthMethodConfig",
    "projection_depth",
    "projection_depths",
    "simplicial_depth",
    "simplicial_depth_oracle",
    "simplicial_depths",
    "spatial_depth",
    "spatial_depths",
    "tukey_depth",
    "tukey_depth_oracle",
    "tukey_depths",
]

METHODS = ("tukey", "simplicial", "spatial", "projection")

@dataclass(frozen=True)
class DepthMethodConfig:
    """Settings for the classical depths.

    ``n_directions`` and ``seed`` drive projection depth and approximate
    Tukey depth; the same directions are used for every query point.
    ``exact_2d`` is only honoured for planar data.
    """

    method: str = "tukey"
    n_directions: int = 1000
    seed: int = 0
    exact_2d: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise DepthError(f"unknown depth method {self.method!r}; expected one of {METHODS}")
        if self.n_directions < 1:
            raise DepthError("n_directions must be >= 1")


def _queries(queries, d: int) -> np.ndarray:
    q = np.asarray(queries, dtype=float)
    if q.ndim == 1:
        q = q.reshape(1, -1) if d > 1 else q[:, None]
    if q.ndim != 2 or q.shape[1] != d:
        raise DimensionError(f"queries must have dimension {d}, got shape {q.shape}")
    return q


def _split_coincident(x, v):
    w = x - v
    zero = ~np.any(w != 0.0, axis=1)
    return w[~zero], int(zero.sum())


# -- angular groups ------------------------------------------------------------

def _direction_groups(w):
    """Counts of points per exact direction, in angular order.

    Each direction is folded onto the upper half-plane, so a direction and its
    antipode share a line group; ``up[g]`` and ``down[g]`` count the points on
    either ray of line ``g``.  Parallel vectors are grouped by an exact zero
    cross product, the same predicate the oracles use.
    """
    upper = (w[:, 1] > 0) | ((w[:, 1] == 0) & (w[:, 0] > 0))
    c = np.where(upper[:, None], w, -w)
    order = np.argsort(np.arctan2(c[:, 1], c[:, 0]), kind="stable")
    c, upper = c[order], upper[order]
    cross = c[:-1, 0] * c[1:, 1] - c[:-1, 1] * c[1:, 0]
    gid = np.cumsum(np.concatenate([[True], cross != 0])) - 1
    g = int(gid[-1]) + 1
    up = np.bincount(gid[upper], minlength=g)
    down = np.bincount(gid[~upper], minlength=g)
    return up.astype(np.int64), down.astype(np.int64)


# -- Tukey ---------------------------------------------------------------------

def _tukey_sweep(x, v) -> float:
    n = x.shape[0]
    w, n_zero = _split_coincident(x, v)
    m = w.shape[0]
    if m == 0:
        return 1.0
    up, down = _direction_groups(w)
    # open half-plane left of a boundary line lying between line groups k and k+1
    left = (up.sum() - np.concatenate([[0], np.cumsum(up)])) + np.concatenate([[0], np.cumsum(down)])
    return (n_zero + int(min(left.min(), (m - left).min()))) / n


def tukey_depth_oracle(v, data) -> float:
    """``O(n^2)`` planar Tukey depth from cross/dot-product signs."""
    x = as_matrix(data)
    if x.shape[1] != 2:
        raise DimensionError("the Tukey oracle is planar only")
    v = np.asarray(v, dtype=float).reshape(-1)
    n = x.shape[0]
    w, n_zero = _split_coincident(x, v)
    if w.shape[0] == 0:
        return 1.0
    cross = np.outer(w[:, 0], w[:, 1]) - np.outer(w[:, 1], w[:, 0])
    dot = w @ w.T
    c_ahead = ((cross > 0) | ((cross == 0) & (dot < 0))).sum(axis=1)
    c_behind = ((cross < 0) | ((cross == 0) & (dot > 0))).sum(axis=1)
    return (n_zero + int(min(c_ahead.min(), c_behind.min()))) / n


def tukey_depths(queries, data, cfg: DepthMethodConfig | None = None) -> np.ndarray:
    """Tukey depth of each query row.

    Exact for ``d <= 2`` (planar sweep, or counting in one dimension);
    otherwise the minimum one-sided fraction over ``cfg.n_directions``
    sampled directions, an upper bound on the exact depth.
    """
    cfg = cfg or DepthMethodConfig("tukey")
    x = as_matrix(data)
    n, d = x.shape
    q = _queries(queries, d)
    if d == 1:
        xs = np.sort(x[:, 0])
        below = np.searchsorted(xs, q[:, 0], "right")
        above = n - np.searchsorted(xs, q[:, 0], "left")
        return np.minimum(below, above) / n
    if d == 2 and cfg.exact_2d:
        return np.array([_tukey_sweep(x, v) for v in q])
    u = sample_unit_directions(cfg.n_directions, d, cfg.seed)
    proj = x @ u.T
    out = np.empty(q.shape[0])
    for i, pv in enumerate(q @ u.T):
        out[i] = (proj <= pv).sum(axis=0).min() / n
    return out


def tukey_depth(v, data, cfg: DepthMethodConfig | None = None) -> float:
    """Halfspace depth: smallest sample fraction in a closed halfspace containing ``v``."""
    return float(tukey_depths(np.atleast_2d(np.asarray(v, dtype=float).reshape(-1)), data, cfg)[0])


# -- simplicial ---------------------------------------------------------------

def _comb3(k):
    return k * (k - 1) * (k - 2) // 6


def _simplicial_sweep(x, v) -> float:
    w, _ = _split_coincident(x, v)
    m = w.shape[0]
    if m < 3:
        return 0.0
    up, down = _direction_groups(w)
    g = up.size
    c = np.concatenate([up, down])
    csum = np.concatenate([[0], np.cumsum(np.concatenate([c, c]))])
    pos = np.arange(2 * g)
    # points strictly inside the open half-turn after each direction
    k = csum[pos + g] - csum[pos + 1]
    # triangles inside an open half-plane, counted from their first vertex
    outside = int(np.sum(_comb3(k + c) - _comb3(k)))
    total = comb(m, 3)
    return (total - outside) / total


def simplicial_depth_oracle(v, data) -> float:
    """``O(n^3)`` planar simplicial depth by orientation tests on every triangle."""
    x = as_matrix(data)
    if x.shape[1] != 2:
        raise DimensionError("the simplicial oracle is planar only")
    v = np.asarray(v, dtype=float).reshape(-1)
    w, _ = _split_coincident(x, v)
    m = w.shape[0]
    if m < 3:
        return 0.0
    idx = np.array(list(combinations(range(m), 3)))
    a, b, c = w[idx[:, 0]], w[idx[:, 1]], w[idx[:, 2]]

    def orient(p, r):
        return p[:, 0] * r[:, 1] - p[:, 1] * r[:, 0]

    o1, o2, o3 = orient(a, b), orient(b, c), orient(c, a)
    inside = ((o1 >= 0) & (o2 >= 0) & (o3 >= 0)) | ((o1 <= 0) & (o2 <= 0) & (o3 <= 0))
    # a flat triangle on a line through v holds v only if two vertices point opposite ways
    flat = (o1 == 0) & (o2 == 0) & (o3 == 0)

    def dot(p, r):
        return p[:, 0] * r[:, 0] + p[:, 1] * r[:, 1]

    straddles = (dot(a, b) < 0) | (dot(b, c) < 0) | (dot(c, a) < 0)
    inside = np.where(flat, straddles, inside)
    return int(inside.sum()) / len(idx)


def simplicial_depths(queries, data, cfg: DepthMethodConfig | None = None) -> np.ndarray:
    """Planar simplicial depth of each query row.

    Triangles are closed, so a query on an edge is contained.  Sample points
    that coincide with the query are left out and the depth is the fraction
    of the ``C(m, 3)`` triangles from the remaining ``m`` points.
    """
    x = as_matrix(data)
    if x.shape[1] != 2:
        raise DimensionError(
            f"exact simplicial depth is implemented for d = 2 only, got d={x.shape[1]}")
    if x.shape[0] < 3:
        raise DepthError("simplicial depth needs n >= d + 1 = 3 points")
    q = _queries(queries, 2)
    return np.array([_simplicial_sweep(x, v) for v in q])


def simplicial_depth(v, data, cfg: DepthMethodConfig | None = None) -> float:
    """Fraction of sample triangles whose closed hull contains ``v``."""
    return float(simplicial_depths(np.atleast_2d(np.asarray(v, dtype=float).reshape(-1)), data, cfg)[0])


# -- spatial -----------------------------------------------------------------------

def spatial_depths(queries, data, metric: Metric | None = None) -> np.ndarray:
    """``1 - ||mean unit vector from v to the data||``; coincident points add zero.

    With a Mahalanobis ``metric`` the data and queries are whitened by its
    shape matrix first, which gives the affine-invariant version.
    """
    x = as_matrix(data)
    n, d = x.shape
    q = _queries(queries, d)
    if metric is not None and metric.kind == "l1":
        raise DepthError("spatial depth supports the l2 and mahalanobis metrics only")
    if metric is not None:
        x = metric.whiten(x)
        q = metric.whiten(q)
    out = np.empty(q.shape[0])
    step = max(1, 2_000_000 // (n * d))
    for start in range(0, q.shape[0], step):
        diff = x[None, :, :] - q[start:start + step, None, :]
        norm = np.linalg.norm(diff, axis=2)
        safe = np.where(norm > 0, norm, 1.0)
        unit = np.where(norm[..., None] > 0, diff / safe[..., None], 0.0)
        out[start:start + step] = 1.0 - np.linalg.norm(unit.sum(axis=1) / n, axis=1)
    return out


def spatial_depth(v, data, metric: Metric | None = None) -> float:
    return float(spatial_depths(np.atleast_2d(np.asarray(v, dtype=float).reshape(-1)), data, metric)[0])


# -- projection -------------------------------------------------------------------

def _projection_directions(d: int, cfg: DepthMethodConfig) -> np.ndarray:
    axes = np.vstack([np.eye(d), -np.eye(d)])
    return np.vstack([sample_unit_directions(cfg.n_directions, d, cfg.seed), axes])


def projection_depths(queries, data, cfg: DepthMethodConfig | None = None) -> np.ndarray:
    """Projection depth ``1 / (1 + outlyingness)`` for each query row.

    The supremum over directions is taken over ``cfg.n_directions`` seeded
    random directions plus the signed coordinate axes.  Median and MAD are
    lower medians with no consistency factor; directions with zero MAD are
    skipped (a :class:`RuntimeWarning` reports how many).
    """
    cfg = cfg or DepthMethodConfig("projection")
    x = as_matrix(data)
    n, d = x.shape
    if n < 2:
        raise DepthError("projection depth needs n >= 2")
    q = _queries(queries, d)
    u = _projection_directions(d, cfg)
    proj = x @ u.T
    med = lower_median(proj, axis=0)
    mad = lower_median(np.abs(proj - med), axis=0)
    ok = mad > 0
    skipped = int((~ok).sum())
    if not ok.any():
        raise DegenerateError("every projection direction has zero MAD")
    if skipped:
        warnings.warn(f"projection depth skipped {skipped} directions with zero MAD",
                      RuntimeWarning, stacklevel=2)
    u, med, mad = u[ok], med[ok], mad[ok]
    out = np.empty(q.shape[0])
    step = max(1, 4_000_000 // u.shape[0])
    for start in range(0, q.shape[0], step):
        pq = q[start:start + step] @ u.T
        out[start:start + step] = np.max(np.abs(pq - med) / mad, axis=1)
    return 1.0 / (1.0 + out)


def projection_depth(v, data, cfg: DepthMethodConfig | None = None) -> float:
    return float(projection_depths(np.atleast_2d(np.asarray(v, dtype=float).reshape(-1)), data, cfg)[0])
