"""Machine predictions fit from a training set.

Two least-squares predictors over a finite covariate support:

* group-blind: the sample mean of all labels at ``x``, pooling both groups,
  so its value cannot depend on ``g``;
* group-aware: the sample mean within each ``(x, g)`` cell.

With Normal labels these cell means are the maximum-likelihood estimates,
and they are the only statistics of the training data that the downstream
decision rules consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import EmptyCellError
from .model import ProblemSpec, TrainingSet

__all__ = ["MachinePrediction", "fit_group_blind", "fit_group_aware"]


@dataclass(frozen=True)
class MachinePrediction:
    """A fitted predictor: finite lookup table plus per-point sample sizes.

    ``values`` maps the predictor's input points to fitted means; for the
    blind predictor points are covariate values, for the aware one they are
    ``(x, g)`` cells. ``counts`` records how many training labels backed each
    point, which the closed-form risk expressions need.
    """

    aware: bool
    values: Mapping
    counts: Mapping

    def predict(self, x, g: int | None = None) -> float:
        key = (x, g) if self.aware else x
        try:
            return self.values[key]
        except KeyError:
            if self.aware:
                raise EmptyCellError(
                    f"group-aware prediction undefined for empty cell ({x!r}, {g})"
                )
            raise EmptyCellError(f"group-blind prediction undefined at x={x!r}")

    def to_document(self) -> dict:
        keys = sorted(self.values, key=repr)
        return {
            "aware": self.aware,
            "points": [
                {"key": list(k) if isinstance(k, tuple) else k,
                 "value": self.values[k],
                 "count": self.counts[k]}
                for k in keys
            ],
        }


def fit_group_blind(training: TrainingSet, spec: ProblemSpec) -> MachinePrediction:
    """Pooled per-covariate sample means, identical for both groups."""
    values, counts = {}, {}
    for x in spec.covariates:
        ys = training.ys(x)
        if ys:
            values[x] = math.fsum(ys) / len(ys)
            counts[x] = len(ys)
    return MachinePrediction(aware=False, values=values, counts=counts)


def fit_group_aware(training: TrainingSet, spec: ProblemSpec) -> MachinePrediction:
    """Per-cell sample means; cells with no data stay undefined."""
    values, counts = {}, {}
    for x, g in spec.cells():
        ys = training.ys(x, g)
        if ys:
            values[(x, g)] = math.fsum(ys) / len(ys)
            counts[(x, g)] = len(ys)
    return MachinePrediction(aware=True, values=values, counts=counts)
