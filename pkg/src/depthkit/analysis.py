"""Rank agreement and central-region overlap between depth notions, plus the canned experiments."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .boundary import ShellPolicy, angular_measure, extract_boundary_shell, gradient
from .classical import (DepthMethodConfig, projection_depths, simplicial_depths,
                        spatial_depths, tukey_depths)
from .datagen import GeneratorSpec, generate, named_model
from .exceptions import DegenerateError, DepthError
from .geometry import Metric, as_matrix
from .mmad import CentralRegion, central_region, depth_3mad

__all__ = [
    "ALL_METHODS",
    "BoundaryReport",
    "CorrelationMatrix",
    "EXPERIMENTS",
    "OverlapMatrix",
    "compute_depths",
    "deepest_region",
    "jaccard_overlap",
    "run_boundary_experiment",
    "run_correlation_experiment",
    "run_experiment",
    "run_overlap_experiment",
    "spearman",
]

ALL_METHODS = ("3mad", "projection", "spatial", "tukey", "simplicial")
# projection-depth direction count used in the experiments
EXPERIMENT_DIRECTIONS = 1000


def spearman(a, b) -> float:
    """Spearman rank correlation with average ranks for ties."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size != b.size:
        raise DepthError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise DepthError("spearman needs at least 2 observations")
    ra = rankdata(a) - (a.size + 1) / 2.0
    rb = rankdata(b) - (b.size + 1) / 2.0
    denom = np.sqrt(np.dot(ra, ra) * np.dot(rb, rb))
    if denom == 0:
        raise DegenerateError("correlation undefined for constant input")
    return float(np.clip(np.dot(ra, rb) / denom, -1.0, 1.0))


def deepest_region(depth, alpha: float = 0.5) -> CentralRegion:
    """Deepest-``alpha`` region from depth values (larger is more central).

    Same lower-quantile rule as :func:`~depthkit.mmad.central_region`, applied
    to ``-depth``; tied depth values enter or leave together.
    """
    region = central_region(-np.asarray(depth, dtype=float), alpha)
    return CentralRegion(alpha=region.alpha, radius_threshold=-region.radius_threshold,
                         member_indices=region.member_indices)


def jaccard_overlap(r1: CentralRegion, r2: CentralRegion, n: int | None = None) -> float:
    """``|A & B| / |A | B|`` of two member sets.

    Pass the sample size ``n`` to have member indices checked against it.
    """
    a = np.asarray(r1.member_indices if isinstance(r1, CentralRegion) else r1)
    b = np.asarray(r2.member_indices if isinstance(r2, CentralRegion) else r2)
    if n is not None and ((a.size and (a.min() < 0 or a.max() >= n))
                          or (b.size and (b.min() < 0 or b.max() >= n))):
        raise DepthError("regions do not belong to a dataset of this size")
    union = np.union1d(a, b).size
    if union == 0:
        return 1.0
    return np.intersect1d(a, b).size / union


def compute_depths(method: str, data, queries=None, metric: Metric | str = "mahalanobis",
                   n_directions: int = EXPERIMENT_DIRECTIONS, seed: int = 0) -> np.ndarray:
    """Depth of each query (default: the sample points) under ``method``.

    ``metric`` applies to 3MAD and spatial depth; the string form estimates a
    Mahalanobis shape from the sample covariance.
    """
    x = as_matrix(data)
    q = x if queries is None else queries
    if isinstance(metric, str) and method in ("3mad", "spatial"):
        metric = Metric.from_name(metric, x)
    if method == "3mad":
        dv = depth_3mad(x, metric, None if queries is None else q)
        return dv.depth if queries is None else dv.query_depth
    if method not in ALL_METHODS:
        raise DepthError(f"unknown method {method!r}; expected one of {ALL_METHODS}")
    cfg = DepthMethodConfig(method, n_directions=n_directions, seed=seed)
    if method == "projection":
        return projection_depths(q, x, cfg)
    if method == "spatial":
        return spatial_depths(q, x, metric)
    if method == "tukey":
        return tukey_depths(q, x, cfg)
    return simplicial_depths(q, x, cfg)


def _depth_table(data, methods, metric, n_directions, seed):
    return {m: compute_depths(m, data, metric=metric, n_directions=n_directions, seed=seed)
            for m in methods}


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    methods: tuple
    values: np.ndarray
    replicates: np.ndarray | None = None

    def entry(self, a: str, b: str) -> float:
        return float(self.values[self.methods.index(a), self.methods.index(b)])


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    methods: tuple
    values: np.ndarray
    alpha: float = 0.5
    replicates: np.ndarray | None = None

    def entry(self, a: str, b: str) -> float:
        return float(self.values[self.methods.index(a), self.methods.index(b)])


def correlation_matrix(depths: dict) -> np.ndarray:
    names = list(depths)
    k = len(names)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = spearman(depths[names[i]], depths[names[j]])
    return out


def overlap_matrix(depths: dict, alpha: float = 0.5) -> np.ndarray:
    names = list(depths)
    regions = [deepest_region(depths[m], alpha) for m in names]
    k = len(names)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = jaccard_overlap(regions[i], regions[j])
    return out


def _replicate_specs(spec: GeneratorSpec, replicates: int):
    if replicates < 1:
        raise DepthError("replicates must be >= 1")
    return [spec.with_seed(spec.seed + r) for r in range(replicates)]


def _map(fn, items, workers: int):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_correlation_experiment(spec: GeneratorSpec, replicates: int = 10,
                               methods=ALL_METHODS, metric: str = "mahalanobis",
                               n_directions: int = EXPERIMENT_DIRECTIONS,
                               workers: int = 1) -> CorrelationMatrix:
    """Spearman matrix of depth rankings at the sample points, averaged over replicates.

    Replicate ``r`` uses data seed ``spec.seed + r``; projection directions use
    the same seed.
    """
    methods = tuple(methods)

    def one(s):
        return correlation_matrix(_depth_table(generate(s), methods, metric, n_directions, s.seed))

    reps = np.stack(_map(one, _replicate_specs(spec, replicates), workers))
    return CorrelationMatrix(methods=methods, values=reps.mean(axis=0), replicates=reps)


def run_overlap_experiment(spec: GeneratorSpec, replicates: int = 10, alpha: float = 0.5,
                           methods=ALL_METHODS, metric: str = "mahalanobis",
                           n_directions: int = EXPERIMENT_DIRECTIONS,
                           workers: int = 1) -> OverlapMatrix:
    """Jaccard matrix of deepest-``alpha`` regions, averaged over replicates."""
    methods = tuple(methods)

    def one(s):
        return overlap_matrix(_depth_table(generate(s), methods, metric, n_directions, s.seed), alpha)

    reps = np.stack(_map(one, _replicate_specs(spec, replicates), workers))
    return OverlapMatrix(methods=methods, values=reps.mean(axis=0), alpha=alpha, replicates=reps)


@dataclass(frozen=True, eq=False)
class BoundaryReport:
    """Paired boundary diagnostics; row ``r`` of each array is replicate ``r``."""

    labels: tuple
    seeds: np.ndarray
    resultant_length: np.ndarray
    gradient: np.ndarray
    radius: np.ndarray
    shell_size: np.ndarray
    measures: list = field(default_factory=list)

    def median_length(self) -> np.ndarray:
        return np.median(self.resultant_length, axis=0)


def boundary_diagnostic(data, policy: ShellPolicy | None = None, center=None):
    """Boundary shell, angular measure and gradient at ``center`` (default: coordinatewise median)."""
    x = as_matrix(data)
    v = np.median(x, axis=0) if center is None else np.asarray(center, dtype=float)
    shell = extract_boundary_shell(v, x, Metric.l2(), policy)
    return shell, angular_measure(shell), gradient(v, shell)


def run_boundary_experiment(symmetric: GeneratorSpec, skewed: GeneratorSpec,
                            replicates: int = 20, policy: ShellPolicy | None = None,
                            workers: int = 1) -> BoundaryReport:
    """Resultant length of the boundary measure at the coordinatewise median, side by side."""
    if symmetric.d != 2 or skewed.d != 2:
        raise DepthError("the boundary experiment expects 2-D models")
    pairs = list(zip(_replicate_specs(symmetric, replicates), _replicate_specs(skewed, replicates)))

    def one(pair):
        return [boundary_diagnostic(generate(s), policy) for s in pair]

    results = _map(one, pairs, workers)
    lengths = np.array([[m.resultant_length for _, m, _ in row] for row in results])
    grads = np.array([[g for _, _, g in row] for row in results])
    radius = np.array([[sh.radius for sh, _, _ in row] for row in results])
    size = np.array([[sh.size for sh, _, _ in row] for row in results])
    seeds = np.array([[a.seed, b.seed] for a, b in pairs])
    return BoundaryReport(labels=("symmetric", "skewed"), seeds=seeds, resultant_length=lengths,
                          gradient=grads, radius=radius, shell_size=size,
                          measures=[[m for _, m, _ in row] for row in results])


# -- canned experiments -------------------------------------------------------------


@dataclass
class ExperimentResult:
    name: str
    kind: str
    result: object
    checks: list          # (description, passed) pairs
    params: dict

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)


def _table1_elliptical(replicates, seed, n, workers):
    spec = named_model("table1-elliptical", n, seed)
    cm = run_correlation_experiment(spec, replicates, workers=workers)
    checks = [(f"mean spearman(3mad, {m}) = {cm.entry('3mad', m):.4f} in [0.90, 1.0]",
               0.90 <= cm.entry("3mad", m) <= 1.0) for m in ALL_METHODS[1:]]
    return "correlation", cm, checks, spec


def _table1_mixture(replicates, seed, n, workers):
    spec = named_model("table1-mixture", n, seed)
    cm = run_correlation_experiment(spec, replicates, workers=workers)
    i = {m: k for k, m in enumerate(cm.methods)}
    r = cm.replicates
    wins = (r[:, i["3mad"], i["projection"]] > r[:, i["3mad"], i["spatial"]]) & \
           (r[:, i["3mad"], i["projection"]] > r[:, i["3mad"], i["simplicial"]])
    need = int(np.ceil(0.8 * len(r)))
    checks = [(f"corr(3mad, projection) beats spatial and simplicial in {int(wins.sum())}"
               f"/{len(r)} replicates (need >= {need})", int(wins.sum()) >= need)]
    return "correlation", cm, checks, spec


def _overlap(model, threshold):
    def run(replicates, seed, n, workers):
        spec = named_model(model, n, seed)
        om = run_overlap_experiment(spec, replicates, alpha=0.5, workers=workers)
        off = om.values[~np.eye(len(om.methods), dtype=bool)]
        checks = [(f"min mean pairwise jaccard = {off.min():.4f} >= {threshold}",
                   bool(off.min() >= threshold))]
        return "overlap", om, checks, spec
    return run


def _boundary_fig8(replicates, seed, n, workers):
    sym = named_model("boundary-symmetric", n, seed)
    skw = named_model("boundary-skewed", n, seed)
    rep = run_boundary_experiment(sym, skw, replicates, workers=workers)
    med_sym, med_skw = rep.median_length()
    checks = [
        (f"median resultant length skewed {med_skw:.4f} > symmetric {med_sym:.4f}",
         bool(med_skw > med_sym)),
        (f"median resultant length symmetric {med_sym:.4f} <= 0.1", bool(med_sym <= 0.1)),
    ]
    return "boundary", rep, checks, sym


# name -> (runner, default replicates)
EXPERIMENTS = {
    "table1-elliptical": (_table1_elliptical, 10),
    "table1-mixture": (_table1_mixture, 10),
    "overlap-elliptical": (_overlap("overlap-elliptical", 0.90), 5),
    "overlap-skew": (_overlap("overlap-skew", 0.80), 3),
    "boundary-fig8": (_boundary_fig8, 20),
}


def run_experiment(name: str, replicates: int | None = None, seed: int = 0,
                   n: int | None = None, workers: int = 1) -> ExperimentResult:
    """Run a named experiment and check it against its acceptance band."""
    if name not in EXPERIMENTS:
        raise DepthError(f"unknown experiment {name!r}; expected one of {sorted(EXPERIMENTS)}")
    runner, default_reps = EXPERIMENTS[name]
    replicates = default_reps if replicates is None else int(replicates)
    kind, result, checks, spec = runner(replicates, seed, n, workers)
    params = {"name": name, "replicates": replicates, "seed": seed, "n": spec.n,
              "model": spec.to_dict()}
    return ExperimentResult(name=name, kind=kind, result=result, checks=checks, params=params)
