"""Disparity and risk functionals of decision rules.

Disparity at ``x`` is the group gap ``d(x,1) - d(x,0)``; risk is expected
squared error against the noisy label, which decomposes into the squared
distance to the true cell mean plus the irreducible ``noise_var``.
Expectations over ``(X, G)`` use the problem's exact probabilities; only the
training-data randomness is estimated, by replaying the rules over seeded
replications.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .model import DecisionRule, Prior, ProblemSpec, RuleKind, TrainingConfig
from .simulate import replicate_rule_values

__all__ = [
    "Estimate",
    "RuleStats",
    "MetricsReport",
    "CellBiasVariance",
    "disparity",
    "avg_disparity",
    "pointwise_risk",
    "risk_at_x",
    "mc_expected_metrics",
    "bias_variance_decomp",
]

AGGREGATE_X = "all"


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate: mean across replications and its standard error.

    ``se`` is None when only one replication was run.
    """

    value: float
    se: float | None
    reps: int


@dataclass(frozen=True)
class RuleStats:
    kind: RuleKind
    disparity_by_x: Mapping
    avg_disparity: Estimate
    risk0_by_cell: Mapping
    risk_by_x: Mapping
    expected_risk: Estimate


@dataclass(frozen=True)
class MetricsReport:
    """Estimated metrics for a set of rules under one problem and prior."""

    rules: Mapping
    reps: int
    seed: int
    noise_var: float
    covariates: tuple

    def rule(self, kind: RuleKind) -> RuleStats:
        return self.rules[kind]

    def excess_risk(self, kind: RuleKind) -> Estimate:
        est = self.rules[kind].expected_risk
        return Estimate(value=est.value - self.noise_var, se=est.se, reps=est.reps)

    def to_rows(self, include_excess: bool = False) -> list:
        """Rows matching the schema (rule, x, quantity, value, se, reps, seed)."""
        rows = []

        def add(kind, x, quantity, est: Estimate):
            rows.append((kind.value, str(x), quantity, est.value, est.se,
                         self.reps, self.seed))

        for kind in RuleKind:
            if kind not in self.rules:
                continue
            stats = self.rules[kind]
            for x in self.covariates:
                add(kind, x, "disparity", stats.disparity_by_x[x])
            add(kind, AGGREGATE_X, "avg_disparity", stats.avg_disparity)
            for x in self.covariates:
                add(kind, x, "risk0_g0", stats.risk0_by_cell[(x, 0)])
                add(kind, x, "risk0_g1", stats.risk0_by_cell[(x, 1)])
                add(kind, x, "risk", stats.risk_by_x[x])
            add(kind, AGGREGATE_X, "expected_risk", stats.expected_risk)
            if include_excess:
                add(kind, AGGREGATE_X, "excess_risk", self.excess_risk(kind))
        return rows

    def to_json_dict(self, include_excess: bool = False) -> dict:
        def est(e: Estimate) -> dict:
            return {"value": e.value, "se": e.se, "reps": e.reps}

        rules = []
        for kind in RuleKind:
            if kind not in self.rules:
                continue
            stats = self.rules[kind]
            entry = {
                "rule": kind.value,
                "disparity_by_x": [
                    {"x": str(x), **est(stats.disparity_by_x[x])} for x in self.covariates
                ],
                "avg_disparity": est(stats.avg_disparity),
                "risk0_by_cell": [
                    {"x": str(x), "g": g, **est(stats.risk0_by_cell[(x, g)])}
                    for x in self.covariates for g in (0, 1)
                ],
                "risk_by_x": [
                    {"x": str(x), **est(stats.risk_by_x[x])} for x in self.covariates
                ],
                "expected_risk": est(stats.expected_risk),
            }
            if include_excess:
                entry["excess_risk"] = est(self.excess_risk(kind))
            rules.append(entry)
        return {"reps": self.reps, "seed": self.seed, "noise_var": self.noise_var,
                "rules": rules}


@dataclass(frozen=True)
class CellBiasVariance:
    """Monte Carlo bias/variance of one rule at one cell."""

    bias: float
    variance: float
    bias_se: float
    variance_se: float
    reps: int


def disparity(rule: DecisionRule, x) -> float:
    """Group gap of a realized rule at ``x``: d(x,1) - d(x,0)."""
    return rule.value(x, 1) - rule.value(x, 0)


def avg_disparity(rule: DecisionRule, spec: ProblemSpec) -> float:
    """Covariate-probability-weighted mean of the per-x disparities."""
    return math.fsum(spec.p_x(x) * disparity(rule, x) for x in spec.covariates)


def pointwise_risk(rule_value, spec: ProblemSpec, x, g: int):
    """Risk of deciding ``rule_value`` at cell (x, g): squared bias plus noise.

    Accepts a scalar or an array of rule values.
    """
    dev = np.asarray(rule_value, dtype=np.float64) - spec.mu(x, g)
    out = dev * dev + spec.noise_var
    return float(out) if np.ndim(rule_value) == 0 else out


def risk_at_x(rule: DecisionRule, spec: ProblemSpec, x) -> float:
    """Group-probability-weighted risk of a realized rule at ``x``."""
    return (spec.p_group(x, 1) * pointwise_risk(rule.value(x, 1), spec, x, 1)
            + spec.p_group(x, 0) * pointwise_risk(rule.value(x, 0), spec, x, 0))


def _estimate(samples: np.ndarray) -> Estimate:
    reps = samples.shape[0]
    value = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(reps)) if reps >= 2 else None
    return Estimate(value=value, se=se, reps=reps)


def _rule_stats(kind: RuleKind, per_cell: Mapping, spec: ProblemSpec) -> RuleStats:
    reps = next(iter(per_cell.values())).shape[0]
    disparity_by_x, risk0_by_cell, risk_by_x = {}, {}, {}
    avg_disp = np.zeros(reps, dtype=np.float64)
    exp_risk = np.zeros(reps, dtype=np.float64)
    for x in spec.covariates:
        disp = per_cell[(x, 1)] - per_cell[(x, 0)]
        disparity_by_x[x] = _estimate(disp)
        avg_disp += spec.p_x(x) * disp
        risk_x = np.zeros(reps, dtype=np.float64)
        for g in (0, 1):
            r0 = pointwise_risk(per_cell[(x, g)], spec, x, g)
            risk0_by_cell[(x, g)] = _estimate(r0)
            risk_x += spec.p_group(x, g) * r0
        risk_by_x[x] = _estimate(risk_x)
        exp_risk += spec.p_x(x) * risk_x
    return RuleStats(
        kind=kind,
        disparity_by_x=disparity_by_x,
        avg_disparity=_estimate(avg_disp),
        risk0_by_cell=risk0_by_cell,
        risk_by_x=risk_by_x,
        expected_risk=_estimate(exp_risk),
    )


def mc_expected_metrics(spec: ProblemSpec, prior: Prior, config: TrainingConfig,
                        rule_kinds: Iterable | None = None, reps: int = 1000,
                        *, threads: int | None = None) -> MetricsReport:
    """Expected metrics over training draws, estimated by seeded replication.

    With ``reps=1`` point values are reported and standard errors are None.
    """
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    kinds = list(rule_kinds) if rule_kinds is not None else list(RuleKind)
    values = replicate_rule_values(spec, prior, config, kinds, reps, threads=threads)
    rules = {kind: _rule_stats(kind, values[kind], spec) for kind in kinds}
    return MetricsReport(rules=rules, reps=reps, seed=config.seed,
                         noise_var=spec.noise_var, covariates=spec.covariates)


def bias_variance_decomp(spec: ProblemSpec, prior: Prior, config: TrainingConfig,
                         rule_kind: RuleKind, reps: int,
                         *, threads: int | None = None) -> Mapping:
    """Per-cell Monte Carlo bias and variance of one rule across replications.

    Returns {(x, g): CellBiasVariance}. The variance standard error uses the
    fourth-moment formula, exact for affine-in-Normal rules and asymptotically
    valid otherwise.
    """
    if reps < 2:
        raise ConfigError("bias_variance_decomp needs reps >= 2")
    values = replicate_rule_values(spec, prior, config, [rule_kind], reps,
                                   threads=threads)[rule_kind]
    out = {}
    for (x, g), samples in values.items():
        mean = float(samples.mean())
        var = float(samples.var(ddof=1))
        centered = samples - mean
        m4 = float(np.mean(centered ** 4))
        var_se = math.sqrt(max(m4 - var * var, 0.0) / reps)
        out[(x, g)] = CellBiasVariance(
            bias=mean - spec.mu(x, g),
            variance=var,
            bias_se=float(samples.std(ddof=1) / math.sqrt(reps)),
            variance_se=var_se,
            reps=reps,
        )
    return out
