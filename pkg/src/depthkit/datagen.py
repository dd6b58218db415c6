"""Seeded generators for the simulation models used in the experiments.

All randomness comes from numpy's PCG64 bit generator seeded with an explicit
integer; replicate ``r`` of an experiment uses ``seed + r``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cholesky

from .exceptions import DepthError
from .geometry import Dataset, check_spd

__all__ = [
    "GENERATOR_KINDS",
    "NAMED_MODELS",
    "RNG_ALGORITHM",
    "GeneratorSpec",
    "generate",
    "named_model",
    "skew_normal_skewness",
]

RNG_ALGORITHM = "PCG64"
GENERATOR_KINDS = ("gaussian", "mixture", "skew_normal", "product")
_MARGINALS = ("normal", "exponential", "uniform")


def _as_list(x):
    return np.asarray(x, dtype=float).tolist()


@dataclass(frozen=True)
class GeneratorSpec:
    """What to simulate.

    ``params`` by kind:

    * ``gaussian``: ``mean`` (d), ``cov`` (d x d)
    * ``mixture``: ``weights`` (k), ``means`` (k x d), ``covs`` (k x d x d)
    * ``skew_normal``: ``alpha`` (d shape parameters; location 0, scale 1,
      independent coordinates)
    * ``product``: ``marginals``, a list of ``{"dist": "normal", "mu", "sigma"}``,
      ``{"dist": "exponential", "rate"}`` or ``{"dist": "uniform", "a", "b"}``
    """

    kind: str
    params: dict = field(default_factory=dict)
    n: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise DepthError(f"unknown generator kind {self.kind!r}; expected one of {GENERATOR_KINDS}")
        if int(self.n) < 1:
            raise DepthError("n must be >= 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))
        self.validate()

    @property
    def d(self) -> int:
        p = self.params
        if self.kind == "gaussian":
            return len(p["mean"])
        if self.kind == "mixture":
            return len(p["means"][0])
        if self.kind == "skew_normal":
            return len(p["alpha"])
        return len(p["marginals"])

    def validate(self):
        p = self.params
        try:
            if self.kind == "gaussian":
                mean = np.asarray(p["mean"], dtype=float)
                cov = check_spd(p["cov"])
                if cov.shape[0] != mean.size:
                    raise DepthError("gaussian mean and cov dimensions disagree")
            elif self.kind == "mixture":
                w = np.asarray(p["weights"], dtype=float)
                means = np.asarray(p["means"], dtype=float)
                covs = np.asarray(p["covs"], dtype=float)
                if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
                    raise DepthError("mixture weights must be positive and sum to 1")
                if means.shape[0] != w.size or covs.shape[0] != w.size:
                    raise DepthError("mixture needs one mean and one cov per weight")
                if covs.shape[1:] != (means.shape[1], means.shape[1]):
                    raise DepthError("mixture mean and cov dimensions disagree")
                for c in covs:
                    check_spd(c)
            elif self.kind == "skew_normal":
                a = np.asarray(p["alpha"], dtype=float)
                if a.ndim != 1 or a.size < 1 or not np.all(np.isfinite(a)):
                    raise DepthError("skew_normal needs a finite alpha vector")
            else:
                margs = p["marginals"]
                if not margs:
                    raise DepthError("product needs at least one marginal")
                for m in margs:
                    if m.get("dist") not in _MARGINALS:
                        raise DepthError(f"unknown marginal {m.get('dist')!r}")
                    if m["dist"] == "exponential" and float(m.get("rate", 1.0)) <= 0:
                        raise DepthError("exponential rate must be > 0")
                    if m["dist"] == "normal" and float(m.get("sigma", 1.0)) <= 0:
                        raise DepthError("normal sigma must be > 0")
                    if m["dist"] == "uniform" and float(m.get("a", 0.0)) >= float(m.get("b", 1.0)):
                        raise DepthError("uniform needs a < b")
        except (KeyError, TypeError, IndexError) as exc:
            raise DepthError(f"invalid {self.kind} parameters: {exc}") from exc

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return replace(self, seed=int(seed))

    def with_n(self, n: int) -> "GeneratorSpec":
        return replace(self, n=int(n))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params, "n": self.n, "seed": self.seed}

    @classmethod
    def from_dict(cls, doc: dict) -> "GeneratorSpec":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise DepthError("generator spec must be a JSON object with a 'kind'")
        return cls(kind=doc["kind"], params=dict(doc.get("params", {})),
                   n=doc.get("n", 100), seed=doc.get("seed", 0))

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DepthError(f"generator spec is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def _gaussian(rng, n, mean, cov):
    factor = cholesky(np.asarray(cov, dtype=float), lower=True)
    return np.asarray(mean, dtype=float) + rng.standard_normal((n, len(mean))) @ factor.T


def _skew_normal(rng, n, alpha):
    alpha = np.asarray(alpha, dtype=float)
    delta = alpha / np.sqrt(1.0 + alpha ** 2)
    z0 = rng.standard_normal((n, alpha.size))
    z1 = rng.standard_normal((n, alpha.size))
    return delta * np.abs(z0) + np.sqrt(1.0 - delta ** 2) * z1


def _marginal(rng, n, m):
    if m["dist"] == "normal":
        return rng.normal(float(m.get("mu", 0.0)), float(m.get("sigma", 1.0)), n)
    if m["dist"] == "exponential":
        return rng.exponential(1.0 / float(m.get("rate", 1.0)), n)
    return rng.uniform(float(m.get("a", 0.0)), float(m.get("b", 1.0)), n)


def generate(spec: GeneratorSpec) -> Dataset:
    """Draw ``spec.n`` observations; identical specs give bitwise-identical data."""
    rng = np.random.default_rng(spec.seed)
    p = spec.params
    n = spec.n
    if spec.kind == "gaussian":
        x = _gaussian(rng, n, p["mean"], p["cov"])
    elif spec.kind == "mixture":
        w = np.asarray(p["weights"], dtype=float)
        comp = rng.choice(w.size, size=n, p=w / w.sum())
        means = np.asarray(p["means"], dtype=float)
        factors = [cholesky(np.asarray(c, dtype=float), lower=True) for c in p["covs"]]
        z = rng.standard_normal((n, means.shape[1]))
        x = np.empty_like(z)
        for k, factor in enumerate(factors):
            rows = comp == k
            x[rows] = means[k] + z[rows] @ factor.T
    elif spec.kind == "skew_normal":
        x = _skew_normal(rng, n, p["alpha"])
    else:
        x = np.column_stack([_marginal(rng, n, m) for m in p["marginals"]])
    return Dataset(x)


def skew_normal_skewness(alpha: float) -> float:
    """Population skewness of the standard skew-normal with shape ``alpha``."""
    delta = alpha / np.sqrt(1.0 + alpha ** 2)
    b = delta * np.sqrt(2.0 / np.pi)
    return float((4.0 - np.pi) / 2.0 * b ** 3 / (1.0 - b ** 2) ** 1.5)


def _eye(d=2):
    return np.eye(d).tolist()


NAMED_MODELS = {
    "figure1-mixture": ("mixture", {
        "weights": [0.5, 0.5], "means": [[0, 0], [3, 3]], "covs": [_eye(), _eye()]}, 500),
    "table1-elliptical": ("gaussian", {"mean": [0, 0], "cov": [[0.7, 0], [0, 0.7]]}, 200),
    # all three components are bivariate
    "table1-mixture": ("mixture", {
        "weights": [0.7, 0.2, 0.1],
        "means": [[0, 0], [3, 1], [-5, 3]],
        "covs": [_eye(), [[1, 0], [0, 0.3]], _eye()]}, 200),
    "contour-elliptical": ("gaussian", {"mean": [0, 0], "cov": [[0.6, 0], [0, 0.6]]}, 200),
    "contour-mixture": ("mixture", {
        "weights": [0.5, 0.5], "means": [[-2, -2], [2, 2]], "covs": [_eye(), _eye()]}, 300),
    "overlap-elliptical": ("gaussian", {"mean": [0, 0], "cov": [[1, 0.7], [0.7, 1]]}, 1000),
    "overlap-skew": ("skew_normal", {"alpha": [5, 0]}, 3000),
    "boundary-symmetric": ("gaussian", {"mean": [0, 0], "cov": _eye()}, 1000),
    "boundary-skewed": ("product", {"marginals": [
        {"dist": "exponential", "rate": 1.0}, {"dist": "normal", "mu": 0.0, "sigma": 1.0}]}, 1000),
}


def named_model(name: str, n: int | None = None, seed: int = 0) -> GeneratorSpec:
    """A :class:`GeneratorSpec` for one of the named simulation models in :data:`NAMED_MODELS`."""
    if name not in NAMED_MODELS:
        raise DepthError(f"unknown model {name!r}; expected one of {sorted(NAMED_MODELS)}")
    kind, params, default_n = NAMED_MODELS[name]
    return GeneratorSpec(kind=kind, params=json.loads(json.dumps(params)),
                         n=default_n if n is None else n, seed=seed)
