"""Boundary shells of the half-mass ball and the local geometry of ``phi``.

For a centre ``v`` the half-mass sphere has radius ``phi(v)``.  A finite
sample never puts mass exactly on that sphere, so the boundary is replaced by
a thin annulus ``| ||X_i - v|| - phi(v) | <= eps``.  The unit directions of
the annulus members form an empirical measure on the sphere.

Moving ``v`` a step ``h`` along ``u`` shifts the ball toward the boundary
mass lying in direction ``u``; the radius must shrink by the same amount to
keep half the mass inside.  Hence ``D_u phi(v) = -E<u, U>`` and
``grad phi(v) = -E[U]`` where ``U`` is the outward unit direction on the
boundary.  The mean direction itself is reported as the resultant of the
angular measure.

Directions are Euclidean unit vectors; the derivative identities hold for
the L2 metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateError, DepthError, DimensionError
from .geometry import Metric, as_matrix, lower_median

__all__ = [
    "AngularMeasure",
    "BoundaryShell",
    "ShellPolicy",
    "angular_measure",
    "default_min_members",
    "directional_derivative",
    "extract_boundary_shell",
    "gradient",
]

SHELL_FRACTION = 0.25
SHELL_FLOOR = 10


def default_min_members(n: int, fraction: float = SHELL_FRACTION) -> int:
    """Adaptive shell size ``max(10, ceil(fraction * n))``."""
    return max(SHELL_FLOOR, math.ceil(round(fraction * n, 9)))


@dataclass(frozen=True)
class ShellPolicy:
    """How wide the boundary annulus is.

    A fixed ``epsilon`` takes precedence.  Otherwise the half-width is the
    smallest one that holds at least ``m_min`` points (default
    :func:`default_min_members`).
    """

    epsilon: float | None = None
    m_min: int | None = None
    fraction: float = SHELL_FRACTION

    def min_members(self, n: int) -> int:
        return self.m_min if self.m_min is not None else default_min_members(n, self.fraction)


@dataclass(frozen=True, eq=False)
class BoundaryShell:
    center: np.ndarray
    radius: float
    half_width: float
    member_indices: np.ndarray
    unit_directions: np.ndarray

    @property
    def size(self) -> int:
        return self.member_indices.size


@dataclass(frozen=True, eq=False)
class AngularMeasure:
    """Equal-weight atoms on the unit sphere and their mean (the resultant)."""

    directions: np.ndarray
    weights: np.ndarray
    resultant: np.ndarray
    resultant_length: float
    angles: np.ndarray | None = None

    @property
    def gradient(self) -> np.ndarray:
        return -self.resultant


def extract_boundary_shell(v, data, metric: Metric | None = None,
                           policy: ShellPolicy | None = None) -> BoundaryShell:
    """Collect the sample points near the half-mass sphere around ``v``.

    Points at distance zero from ``v`` are never members (their direction is
    undefined).
    """
    metric = metric or Metric.l2()
    policy = policy or ShellPolicy()
    x = as_matrix(data)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != x.shape[1]:
        raise DimensionError(f"centre has dimension {v.size}, data has {x.shape[1]}")
    r = metric.distances(v, x)
    phi = float(lower_median(r))
    usable = np.flatnonzero(r > 0)
    if usable.size == 0:
        raise DegenerateError("all sample points coincide with the centre")
    gap = np.abs(r[usable] - phi)
    if policy.epsilon is not None:
        if policy.epsilon < 0:
            raise DepthError("epsilon must be nonnegative")
        eps = float(policy.epsilon)
    else:
        m_min = policy.min_members(x.shape[0])
        if x.shape[0] < m_min:
            raise DepthError(f"need at least m_min={m_min} points, got n={x.shape[0]}")
        if usable.size < m_min:
            raise DegenerateError(
                f"only {usable.size} points differ from the centre; m_min={m_min}")
        eps = float(np.partition(gap, m_min - 1)[m_min - 1])
    members = usable[gap <= eps]
    diffs = x[members] - v
    dirs = diffs / np.linalg.norm(diffs, axis=1)[:, None]
    return BoundaryShell(center=v, radius=phi, half_width=eps,
                         member_indices=members, unit_directions=dirs)


def _mean_direction(shell: BoundaryShell) -> np.ndarray:
    if shell.size == 0:
        raise DegenerateError("boundary shell is empty")
    return shell.unit_directions.mean(axis=0)


def directional_derivative(v, u, shell: BoundaryShell) -> float:
    """Shell estimate of ``D_u phi(v) = -mean <u, U>``; lies in ``[-1, 1]``."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if not np.isclose(np.linalg.norm(u), 1.0, atol=1e-9):
        raise DepthError("direction u must have unit length")
    mean = _mean_direction(shell)
    if u.size != mean.size:
        raise DimensionError(f"direction has dimension {u.size}, shell has {mean.size}")
    return float(-(shell.unit_directions @ u).mean())


def gradient(v, shell: BoundaryShell) -> np.ndarray:
    """Shell estimate of ``grad phi(v)``: minus the mean boundary direction."""
    return -_mean_direction(shell)


def angular_measure(shell: BoundaryShell) -> AngularMeasure:
    """Empirical boundary measure with uniform weights; 2-D shells also get angles in ``[-pi, pi)``."""
    mean = _mean_direction(shell)
    m = shell.size
    weights = np.full(m, 1.0 / m)
    angles = None
    if shell.unit_directions.shape[1] == 2:
        angles = np.arctan2(shell.unit_directions[:, 1], shell.unit_directions[:, 0])
        angles = np.where(angles >= np.pi, -np.pi, angles)
    return AngularMeasure(directions=shell.unit_directions, weights=weights,
                          resultant=mean, resultant_length=float(np.linalg.norm(mean)),
                          angles=angles)
