"""Disparity and risk of machine-assisted human decisions.

Five decision rules over a shared prediction problem: group-blind and
group-aware machine predictors, an unassisted Bayesian decision maker, and
the same decision maker updating on either machine signal. The package
estimates each rule's between-group disparity and squared-error risk by
seeded Monte Carlo, evaluates the balanced example's closed forms exactly,
and verifies the ordering and trade-off claims empirically.
"""

from .decisions import (
    DisparityCheck,
    PosteriorSummary,
    SignalKind,
    check_delta_disparate,
    decide_assisted_aware_conjugate,
    decide_assisted_blind_conjugate,
    decide_cell,
    decide_unassisted,
    grid_posterior_aware,
    grid_posterior_blind,
    realize_rules,
)
from .errors import (
    AssistFairError,
    ConfigError,
    EmptyCellError,
    PreconditionError,
    SignalSupportError,
    SpecValidationError,
)
from .metrics import (
    CellBiasVariance,
    Estimate,
    MetricsReport,
    RuleStats,
    avg_disparity,
    bias_variance_decomp,
    disparity,
    mc_expected_metrics,
    pointwise_risk,
    risk_at_x,
)
from .model import (
    ConjugateNormalPrior,
    DecisionRule,
    DerivedExampleParams,
    GridPrior,
    Prior,
    ProblemSpec,
    RuleKind,
    TrainingConfig,
    TrainingSet,
    config_to_document,
    dense_grid_from_conjugate,
    derive_example_params,
    diagonal_grid,
    document_to_config,
    document_to_prior,
    document_to_spec,
    normal_marginal_grid,
    prior_to_document,
    product_grid,
    sample_deployment_group,
    sample_training,
    spec_to_document,
    validate_config,
    validate_spec,
    weighted_mean_mu,
)
from .oracle import (
    ClosedFormTable,
    Regime,
    RegimeResult,
    classify_regime,
    delta_threshold_example,
    example_closed_forms,
    machine_risk_expectations,
    xi_threshold_general,
)
from .predictors import MachinePrediction, fit_group_aware, fit_group_blind
from .simulate import (
    replicate_cell_means,
    replicate_rule_values,
    resolve_threads,
    rule_values_from_cell_means,
)
from .verify import (
    ConsistencyResult,
    VerificationOutcome,
    verify_consistency,
    verify_disparity_reversal,
    verify_machine_regimes,
    verify_remark1,
    verify_remark2,
    verify_reordering,
    verify_tradeoff_reversal,
)

__version__ = "0.1.0"

__all__ = [
    "AssistFairError",
    "CellBiasVariance",
    "ClosedFormTable",
    "ConfigError",
    "ConjugateNormalPrior",
    "ConsistencyResult",
    "DecisionRule",
    "DerivedExampleParams",
    "DisparityCheck",
    "EmptyCellError",
    "Estimate",
    "GridPrior",
    "MachinePrediction",
    "MetricsReport",
    "PosteriorSummary",
    "PreconditionError",
    "Prior",
    "ProblemSpec",
    "Regime",
    "RegimeResult",
    "RuleKind",
    "RuleStats",
    "SignalKind",
    "SignalSupportError",
    "SpecValidationError",
    "TrainingConfig",
    "TrainingSet",
    "VerificationOutcome",
    "avg_disparity",
    "bias_variance_decomp",
    "check_delta_disparate",
    "classify_regime",
    "config_to_document",
    "decide_assisted_aware_conjugate",
    "decide_assisted_blind_conjugate",
    "decide_cell",
    "decide_unassisted",
    "delta_threshold_example",
    "dense_grid_from_conjugate",
    "derive_example_params",
    "diagonal_grid",
    "disparity",
    "document_to_config",
    "document_to_prior",
    "document_to_spec",
    "example_closed_forms",
    "fit_group_aware",
    "fit_group_blind",
    "grid_posterior_aware",
    "grid_posterior_blind",
    "machine_risk_expectations",
    "mc_expected_metrics",
    "normal_marginal_grid",
    "pointwise_risk",
    "prior_to_document",
    "product_grid",
    "realize_rules",
    "replicate_cell_means",
    "replicate_rule_values",
    "resolve_threads",
    "risk_at_x",
    "rule_values_from_cell_means",
    "sample_deployment_group",
    "sample_training",
    "spec_to_document",
    "validate_config",
    "validate_spec",
    "verify_consistency",
    "verify_disparity_reversal",
    "verify_machine_regimes",
    "verify_remark1",
    "verify_remark2",
    "verify_reordering",
    "verify_tradeoff_reversal",
    "weighted_mean_mu",
    "xi_threshold_general",
]
