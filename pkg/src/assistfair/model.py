"""Domain types and the data-generating process.

The ground truth is a finite-support covariate ``X``, a binary group ``G``,
and a real label ``Y`` with ``Y | X=x, G=g ~ Normal(mu(x, g), noise_var)``.
Training data consists of a fixed number of iid draws per ``(x, g)`` cell.
The decision-maker's beliefs over the cell means come in two flavors: an
independent conjugate-Normal prior per cell, or an arbitrary discrete grid
of ``(mu1, mu0)`` pairs per covariate value.

All types are plain frozen dataclasses; nothing here mutates after
construction, so instances are safe to share across threads. Sampling takes
explicit seeds and is driven by the counter-based streams in
:mod:`assistfair.rng`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import rng
from .errors import EmptyCellError, SpecValidationError

__all__ = [
    "PROB_SUM_TOL",
    "Covariate",
    "Cell",
    "RuleKind",
    "ProblemSpec",
    "TrainingConfig",
    "TrainingSet",
    "ConjugateNormalPrior",
    "GridPrior",
    "Prior",
    "DerivedExampleParams",
    "DecisionRule",
    "validate_spec",
    "weighted_mean_mu",
    "sample_training",
    "sample_deployment_group",
    "derive_example_params",
    "normal_marginal_grid",
    "product_grid",
    "diagonal_grid",
    "dense_grid_from_conjugate",
    "spec_to_document",
    "document_to_spec",
    "prior_to_document",
    "document_to_prior",
    "config_to_document",
    "document_to_config",
]

PROB_SUM_TOL = 1e-12
_MAX_SEED = 2 ** 64

Covariate = Hashable
Cell = tuple  # (x, g)


class RuleKind(enum.Enum):
    """The five decision rules under comparison."""

    F_MINUS = "f_minus"   # group-blind machine prediction, applied directly
    F_PLUS = "f_plus"     # group-aware machine prediction, applied directly
    D0 = "d0"             # unassisted human decision (prior mean)
    D_MINUS = "d_minus"   # human decision after seeing the blind prediction
    D_PLUS = "d_plus"     # human decision after seeing the aware prediction

    @classmethod
    def from_name(cls, name: str) -> "RuleKind":
        for kind in cls:
            if kind.value == name or kind.name == name:
                return kind
        raise SpecValidationError(f"unknown rule kind {name!r}")


ALL_RULE_KINDS = tuple(RuleKind)


@dataclass(frozen=True)
class ProblemSpec:
    """Ground truth of the data-generating process.

    covariates:      ordered finite support of X (opaque identifiers)
    covariate_probs: P(X=x) per covariate, summing to 1
    group_probs:     P(G=1 | X=x) per covariate
    true_means:      mu(x, g) per cell (x, g in {0, 1})
    noise_var:       label noise variance, shared by all cells
    """

    covariates: tuple
    covariate_probs: Mapping
    group_probs: Mapping
    true_means: Mapping
    noise_var: float

    def mu(self, x, g: int) -> float:
        return self.true_means[(x, g)]

    def p_x(self, x) -> float:
        return self.covariate_probs[x]

    def p_group(self, x, g: int) -> float:
        p1 = self.group_probs[x]
        return p1 if g == 1 else 1.0 - p1

    def cells(self) -> tuple:
        """Canonical cell order: covariates in spec order, g in (0, 1)."""
        return tuple((x, g) for x in self.covariates for g in (0, 1))

    def cell_index(self, x, g: int) -> int:
        return 2 * self.covariates.index(x) + g

    def delta_mu(self, x) -> float:
        return self.mu(x, 1) - self.mu(x, 0)


@dataclass(frozen=True)
class TrainingConfig:
    """Per-cell training sample sizes and the sampling seed."""

    counts: Mapping
    seed: int

    def count(self, x, g: int) -> int:
        return self.counts.get((x, g), 0)

    def total(self, x) -> int:
        return self.count(x, 0) + self.count(x, 1)


@dataclass(frozen=True)
class TrainingSet:
    """Realized labeled sample; records are (x, g, y) triples."""

    records: tuple
    counts: Mapping = field(default=None)

    def __post_init__(self):
        derived: dict = {}
        for x, g, _y in self.records:
            derived[(x, g)] = derived.get((x, g), 0) + 1
        if self.counts is None:
            object.__setattr__(self, "counts", derived)
        elif dict(self.counts) != derived:
            raise SpecValidationError("TrainingSet counts do not match records")
        for _x, _g, y in self.records:
            if not math.isfinite(y):
                raise SpecValidationError("TrainingSet contains non-finite label")

    def ys(self, x, g=None) -> list:
        if g is None:
            return [y for (xi, _gi, y) in self.records if xi == x]
        return [y for (xi, gi, y) in self.records if xi == x and gi == g]


@dataclass(frozen=True)
class ConjugateNormalPrior:
    """Independent Normal(beta(x, g), tau_sq) belief per cell."""

    beta: Mapping
    tau_sq: float

    def __post_init__(self):
        if not self.tau_sq > 0:
            raise SpecValidationError("tau_sq must be positive")
        for cell, b in self.beta.items():
            if not math.isfinite(b):
                raise SpecValidationError(f"prior mean for cell {cell} is not finite")

    def beta_gap(self, x) -> float:
        return self.beta[(x, 1)] - self.beta[(x, 0)]

    def beta_bar(self, x) -> float:
        return 0.5 * (self.beta[(x, 1)] + self.beta[(x, 0)])


@dataclass(frozen=True)
class GridPrior:
    """Discrete belief over mean pairs: per x, points (mu1_i, mu0_i) with weights.

    Weights must be non-negative and sum to 1 per covariate value.
    """

    points: Mapping  # x -> (mu1: ndarray, mu0: ndarray, weights: ndarray)

    def __post_init__(self):
        frozen = {}
        for x, (mu1, mu0, w) in self.points.items():
            mu1 = np.asarray(mu1, dtype=np.float64)
            mu0 = np.asarray(mu0, dtype=np.float64)
            w = np.asarray(w, dtype=np.float64)
            if mu1.size == 0:
                raise SpecValidationError(f"grid prior at x={x!r} is empty")
            if not (mu1.shape == mu0.shape == w.shape):
                raise SpecValidationError(f"grid arrays at x={x!r} have mismatched shapes")
            if np.any(w < 0):
                raise SpecValidationError(f"grid weights at x={x!r} must be non-negative")
            if abs(float(w.sum()) - 1.0) > PROB_SUM_TOL:
                raise SpecValidationError(
                    f"grid weights at x={x!r} sum to {float(w.sum())!r}, expected 1"
                )
            if not (np.all(np.isfinite(mu1)) and np.all(np.isfinite(mu0))):
                raise SpecValidationError(f"grid support at x={x!r} contains non-finite values")
            for arr in (mu1, mu0, w):
                arr.flags.writeable = False
            frozen[x] = (mu1, mu0, w)
        object.__setattr__(self, "points", frozen)

    def support(self, x, g: int) -> np.ndarray:
        mu1, mu0, _ = self.points[x]
        return mu1 if g == 1 else mu0

    def weights(self, x) -> np.ndarray:
        return self.points[x][2]


Prior = ConjugateNormalPrior | GridPrior


@dataclass(frozen=True)
class DerivedExampleParams:
    """Scalar reparametrization of the balanced single-covariate example."""

    delta_mu: float   # mu(1) - mu(0)
    mu_bar: float     # (mu(1) + mu(0)) / 2
    delta: float      # beta(1) - beta(0)
    beta_bar: float   # (beta(1) + beta(0)) / 2
    n: int            # total sample size, split n/2 per group


@dataclass(frozen=True)
class DecisionRule:
    """A realized mapping (x, g) -> decision, tagged by the rule that produced it."""

    kind: RuleKind
    values: Mapping  # (x, g) -> float

    def __post_init__(self):
        if self.kind is RuleKind.F_MINUS:
            xs = {x for (x, _g) in self.values}
            for x in xs:
                v1, v0 = self.values.get((x, 1)), self.values.get((x, 0))
                if v1 is not None and v0 is not None and v1 != v0:
                    raise SpecValidationError(
                        "group-blind rule must take identical values across groups"
                    )

    def value(self, x, g: int) -> float:
        try:
            return self.values[(x, g)]
        except KeyError:
            raise EmptyCellError(f"rule {self.kind.value} undefined at cell ({x!r}, {g})")


def validate_spec(spec: ProblemSpec) -> ProblemSpec:
    """Check all ProblemSpec invariants; on success return the spec unchanged.

    Raises SpecValidationError naming the first violated invariant.
    """
    if len(spec.covariates) == 0:
        raise SpecValidationError("covariate support is empty")
    if len(set(spec.covariates)) != len(spec.covariates):
        raise SpecValidationError("covariate values must be distinct")
    if not (isinstance(spec.noise_var, (int, float)) and spec.noise_var > 0):
        raise SpecValidationError("noise_var must be positive")
    total = math.fsum(spec.covariate_probs.get(x, 0.0) for x in spec.covariates)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise SpecValidationError(f"covariate_probs sum to {total!r}, expected 1")
    for x in spec.covariates:
        px = spec.covariate_probs.get(x)
        if px is None or not 0.0 <= px <= 1.0:
            raise SpecValidationError(f"covariate_probs[{x!r}] must lie in [0, 1]")
        pg = spec.group_probs.get(x)
        if pg is None or not 0.0 <= pg <= 1.0:
            raise SpecValidationError(f"group_probs[{x!r}] must lie in [0, 1]")
        for g in (0, 1):
            mu = spec.true_means.get((x, g))
            if mu is None:
                raise SpecValidationError(f"missing true mean for cell ({x!r}, {g})")
            if not math.isfinite(mu):
                raise SpecValidationError(f"true mean for cell ({x!r}, {g}) is not finite")
    return spec


def validate_config(config: TrainingConfig, spec: ProblemSpec) -> TrainingConfig:
    """Check TrainingConfig invariants against a spec's support."""
    if not isinstance(config.seed, int) or not 0 <= config.seed < _MAX_SEED:
        raise SpecValidationError("seed must be an unsigned 64-bit integer")
    for cell, n in config.counts.items():
        if cell not in set(spec.cells()):
            raise SpecValidationError(f"counts given for unknown cell {cell!r}")
        if not isinstance(n, int) or n < 0:
            raise SpecValidationError(f"count for cell {cell!r} must be a non-negative integer")
    return config


def weighted_mean_mu(spec: ProblemSpec, config: TrainingConfig, x) -> float:
    """Count-weighted true mean of the training cells at ``x``.

    Returns (n(x,1) mu(x,1) + n(x,0) mu(x,0)) / (n(x,1) + n(x,0)).
    """
    n1, n0 = config.count(x, 1), config.count(x, 0)
    if n1 + n0 <= 0:
        raise EmptyCellError(f"no training observations at x={x!r}")
    return (n1 * spec.mu(x, 1) + n0 * spec.mu(x, 0)) / (n1 + n0)


def sample_training(spec: ProblemSpec, config: TrainingConfig) -> TrainingSet:
    """Draw the training set: exactly n(x, g) iid labels per cell.

    Fully determined by ``config.seed``; cell (x, g) draws from the stream
    ``derive_key(seed, STREAM_TRAINING, cell_index)`` so cells never share
    randomness and the same seed always reproduces the same records.
    """
    validate_spec(spec)
    validate_config(config, spec)
    sd = math.sqrt(spec.noise_var)
    records = []
    for x, g in spec.cells():
        m = config.count(x, g)
        if m == 0:
            continue
        key = rng.derive_key(config.seed, rng.STREAM_TRAINING, spec.cell_index(x, g))
        ys = rng.normal_stream(key, m, mean=spec.mu(x, g), sd=sd)
        records.extend((x, g, float(y)) for y in ys)
    return TrainingSet(records=tuple(records))


def sample_deployment_group(spec: ProblemSpec, x, seed: int, size: int | None = None):
    """Draw deployment group membership(s) at ``x``: Bernoulli(P(G=1 | X=x)).

    With ``size=None`` returns a single int in {0, 1}; otherwise an int array.
    """
    validate_spec(spec)
    if x not in spec.covariates:
        raise SpecValidationError(f"unknown covariate value {x!r}")
    key = rng.derive_key(seed, rng.STREAM_DEPLOYMENT, spec.covariates.index(x))
    n = 1 if size is None else size
    draws = (rng.uniform_stream(key, n) < spec.group_probs[x]).astype(int)
    return int(draws[0]) if size is None else draws


def derive_example_params(spec: ProblemSpec, prior: ConjugateNormalPrior,
                          config: TrainingConfig) -> DerivedExampleParams:
    """Reduce a balanced, single-covariate setup to its scalar example parameters.

    Requires exactly one covariate value and equal group counts; other
    configurations have no scalar reduction and are rejected.
    """
    if len(spec.covariates) != 1:
        raise SpecValidationError("example parameters require a single covariate value")
    if not isinstance(prior, ConjugateNormalPrior):
        raise SpecValidationError("example parameters require a conjugate-Normal prior")
    x = spec.covariates[0]
    n1, n0 = config.count(x, 1), config.count(x, 0)
    if n1 != n0 or n1 <= 0:
        raise SpecValidationError("example parameters require balanced positive counts")
    return DerivedExampleParams(
        delta_mu=spec.delta_mu(x),
        mu_bar=0.5 * (spec.mu(x, 1) + spec.mu(x, 0)),
        delta=prior.beta_gap(x),
        beta_bar=prior.beta_bar(x),
        n=n1 + n0,
    )


# ---------------------------------------------------------------------------
# Grid construction helpers


def normal_marginal_grid(center: float, sd: float, half_width_sds: float = 8.0,
                         n_points: int = 2001) -> tuple:
    """Equally spaced discretization of Normal(center, sd^2) over +-half_width_sds."""
    pts = np.linspace(center - half_width_sds * sd, center + half_width_sds * sd, n_points)
    logw = -0.5 * ((pts - center) / sd) ** 2
    w = np.exp(logw - logw.max())
    return pts, w / w.sum()


def product_grid(mu1_points, w1, mu0_points, w0) -> tuple:
    """Independent product of two marginal grids, flattened to pair form."""
    mu1 = np.repeat(np.asarray(mu1_points, dtype=np.float64), len(mu0_points))
    mu0 = np.tile(np.asarray(mu0_points, dtype=np.float64), len(mu1_points))
    w = np.outer(np.asarray(w1, dtype=np.float64), np.asarray(w0, dtype=np.float64)).ravel()
    return mu1, mu0, w / w.sum()


def diagonal_grid(points, weights) -> tuple:
    """Grid concentrated on mu1 == mu0: belief that the groups share a mean."""
    pts = np.asarray(points, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    return pts, pts.copy(), w / w.sum()


def dense_grid_from_conjugate(prior: ConjugateNormalPrior, covariates: Sequence,
                              half_width_sds: float = 8.0,
                              n_points: int = 2001) -> GridPrior:
    """Dense product-grid discretization of a conjugate-Normal prior.

    Used as the numerical cross-check of the closed-form posterior updates;
    +-8 prior standard deviations at 2001 points per dimension reproduces the
    conjugate means to well below 1e-6.
    """
    tau = math.sqrt(prior.tau_sq)
    points = {}
    for x in covariates:
        p1, w1 = normal_marginal_grid(prior.beta[(x, 1)], tau, half_width_sds, n_points)
        p0, w0 = normal_marginal_grid(prior.beta[(x, 0)], tau, half_width_sds, n_points)
        points[x] = product_grid(p1, w1, p0, w0)
    return GridPrior(points=points)


# ---------------------------------------------------------------------------
# JSON document round-trip
#
# A single flat document carries the spec, the training configuration, and
# the prior:
#
# {
#   "covariates": ["x0", ...],
#   "covariate_probs": {"x0": 1.0, ...},
#   "group_probs": {"x0": 0.5, ...},               # P(G=1 | X=x)
#   "true_means": {"x0": [mu_g0, mu_g1], ...},
#   "noise_var": 1.0,
#   "counts": {"x0": [n_g0, n_g1], ...},
#   "seed": 20240817,
#   "prior": {"kind": "conjugate_normal",
#             "beta": {"x0": [beta_g0, beta_g1], ...}, "tau_sq": 1.0}
#         or {"kind": "grid",
#             "points": {"x0": [[mu1, mu0, weight], ...], ...}}
# }


def _covariate_key(x) -> str:
    return str(x)


def spec_to_document(spec: ProblemSpec) -> dict:
    return {
        "covariates": list(spec.covariates),
        "covariate_probs": {_covariate_key(x): spec.covariate_probs[x] for x in spec.covariates},
        "group_probs": {_covariate_key(x): spec.group_probs[x] for x in spec.covariates},
        "true_means": {
            _covariate_key(x): [spec.mu(x, 0), spec.mu(x, 1)] for x in spec.covariates
        },
        "noise_var": spec.noise_var,
    }


def document_to_spec(doc: Mapping) -> ProblemSpec:
    covariates = tuple(doc["covariates"])
    by_key = {_covariate_key(x): x for x in covariates}

    def resolve(mapping: Mapping) -> dict:
        return {by_key[k]: v for k, v in mapping.items()}

    probs = resolve(doc["covariate_probs"])
    groups = resolve(doc["group_probs"])
    means = {}
    for k, (m0, m1) in doc["true_means"].items():
        x = by_key[k]
        means[(x, 0)] = float(m0)
        means[(x, 1)] = float(m1)
    spec = ProblemSpec(
        covariates=covariates,
        covariate_probs=probs,
        group_probs=groups,
        true_means=means,
        noise_var=float(doc["noise_var"]),
    )
    return validate_spec(spec)


def config_to_document(config: TrainingConfig, spec: ProblemSpec) -> dict:
    return {
        "counts": {
            _covariate_key(x): [config.count(x, 0), config.count(x, 1)]
            for x in spec.covariates
        },
        "seed": config.seed,
    }


def document_to_config(doc: Mapping, spec: ProblemSpec) -> TrainingConfig:
    by_key = {_covariate_key(x): x for x in spec.covariates}
    counts = {}
    for k, (n0, n1) in doc["counts"].items():
        x = by_key[k]
        counts[(x, 0)] = int(n0)
        counts[(x, 1)] = int(n1)
    config = TrainingConfig(counts=counts, seed=int(doc["seed"]))
    return validate_config(config, spec)


def prior_to_document(prior: Prior, spec: ProblemSpec) -> dict:
    if isinstance(prior, ConjugateNormalPrior):
        return {
            "kind": "conjugate_normal",
            "beta": {
                _covariate_key(x): [prior.beta[(x, 0)], prior.beta[(x, 1)]]
                for x in spec.covariates
            },
            "tau_sq": prior.tau_sq,
        }
    return {
        "kind": "grid",
        "points": {
            _covariate_key(x): [
                [float(m1), float(m0), float(w)]
                for m1, m0, w in zip(*prior.points[x])
            ]
            for x in spec.covariates
        },
    }


def document_to_prior(doc: Mapping, spec: ProblemSpec) -> Prior:
    by_key = {_covariate_key(x): x for x in spec.covariates}
    kind = doc.get("kind")
    if kind == "conjugate_normal":
        beta = {}
        for k, (b0, b1) in doc["beta"].items():
            x = by_key[k]
            beta[(x, 0)] = float(b0)
            beta[(x, 1)] = float(b1)
        return ConjugateNormalPrior(beta=beta, tau_sq=float(doc["tau_sq"]))
    if kind == "grid":
        points = {}
        for k, triples in doc["points"].items():
            arr = np.asarray(triples, dtype=np.float64).reshape(-1, 3)
            points[by_key[k]] = (arr[:, 0], arr[:, 1], arr[:, 2])
        return GridPrior(points=points)
    raise SpecValidationError(f"unknown prior kind {kind!r}")
