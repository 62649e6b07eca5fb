"""Disparity and risk functionals, Monte Carlo estimates, bias/variance."""

import math

import numpy as np
import pytest

import assistfair as af


def canonical_spec(mu0=0.0, mu1=0.0):
    return af.ProblemSpec(
        covariates=("x0",), covariate_probs={"x0": 1.0}, group_probs={"x0": 0.5},
        true_means={("x0", 0): mu0, ("x0", 1): mu1}, noise_var=1.0,
    )


def canonical_prior():
    return af.ConjugateNormalPrior(beta={("x0", 0): -0.5, ("x0", 1): 0.5}, tau_sq=1.0)


def canonical_config(half=4, seed=20240817):
    return af.TrainingConfig(counts={("x0", 0): half, ("x0", 1): half}, seed=seed)


class TestFunctionals:
    def test_pointwise_risk_is_squared_error_plus_noise(self):
        spec = canonical_spec(mu0=2.0)
        assert af.pointwise_risk(0.5, spec, "x0", 0) == pytest.approx(1.5**2 + 1.0)
        arr = af.pointwise_risk(np.asarray([0.5, 2.0]), spec, "x0", 0)
        assert np.allclose(arr, [3.25, 1.0])

    def test_risk_at_x_group_weighting(self):
        spec = af.ProblemSpec(
            covariates=("a",), covariate_probs={"a": 1.0}, group_probs={"a": 0.25},
            true_means={("a", 0): 0.0, ("a", 1): 1.0}, noise_var=0.5,
        )
        rule = af.DecisionRule(kind=af.RuleKind.D0, values={("a", 0): 0.5, ("a", 1): 0.5})
        want = 0.75 * (0.25 + 0.5) + 0.25 * (0.25 + 0.5)
        assert af.risk_at_x(rule, spec, "a") == pytest.approx(want)

    def test_disparity_and_average(self):
        spec = af.ProblemSpec(
            covariates=("a", "b"), covariate_probs={"a": 0.25, "b": 0.75},
            group_probs={"a": 0.5, "b": 0.5},
            true_means={("a", 0): 0.0, ("a", 1): 0.0, ("b", 0): 0.0, ("b", 1): 0.0},
            noise_var=1.0,
        )
        rule = af.DecisionRule(kind=af.RuleKind.D0, values={
            ("a", 0): 0.0, ("a", 1): 1.0, ("b", 0): 0.5, ("b", 1): 0.3})
        assert af.disparity(rule, "a") == pytest.approx(1.0)
        assert af.disparity(rule, "b") == pytest.approx(-0.2)
        assert af.avg_disparity(rule, spec) == pytest.approx(0.25 * 1.0 + 0.75 * -0.2)


class TestMonteCarloReport:
    def test_single_rep_has_no_se(self):
        report = af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                        canonical_config(), None, 1)
        stats = report.rule(af.RuleKind.D_PLUS)
        assert stats.expected_risk.se is None
        assert stats.avg_disparity.reps == 1

    def test_blind_machine_disparity_is_exactly_zero(self):
        report = af.mc_expected_metrics(canonical_spec(mu0=-0.3, mu1=0.9),
                                        canonical_prior(), canonical_config(), None, 500)
        stats = report.rule(af.RuleKind.F_MINUS)
        assert stats.avg_disparity.value == 0.0
        assert stats.avg_disparity.se == 0.0

    def test_unassisted_rule_is_deterministic(self):
        report = af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                        canonical_config(), None, 300)
        stats = report.rule(af.RuleKind.D0)
        assert stats.avg_disparity.value == pytest.approx(1.0, abs=1e-12)
        assert stats.expected_risk.se == pytest.approx(0.0, abs=1e-12)

    def test_thread_count_does_not_change_values(self):
        args = (canonical_spec(mu0=-0.2, mu1=0.4), canonical_prior(),
                canonical_config(half=6), None, 400)
        one = af.mc_expected_metrics(*args, threads=1)
        four = af.mc_expected_metrics(*args, threads=4)
        for kind in af.RuleKind:
            a, b = one.rule(kind), four.rule(kind)
            assert a.expected_risk.value == b.expected_risk.value
            assert a.avg_disparity.value == b.avg_disparity.value
            assert a.expected_risk.se == b.expected_risk.se

    def test_se_shrinks_like_root_reps(self):
        spec, prior = canonical_spec(), canonical_prior()
        small = af.mc_expected_metrics(spec, prior, canonical_config(), None, 1000)
        large = af.mc_expected_metrics(spec, prior, canonical_config(), None, 16000)
        ratio = (large.rule(af.RuleKind.D_PLUS).expected_risk.se
                 / small.rule(af.RuleKind.D_PLUS).expected_risk.se)
        assert 0.15 < ratio < 0.35

    def test_matches_closed_forms_at_moderate_reps(self):
        table = af.example_closed_forms(1.0, 1.0, 8, 1.0, 0.0, 0.0, 0.0)
        report = af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                        canonical_config(), None, 20000)
        for kind in af.RuleKind:
            stats = report.rule(kind)
            d, r = stats.avg_disparity, stats.expected_risk
            assert abs(d.value - table.expected_disparity[kind]) <= 4 * d.se + 1e-12
            assert abs(r.value - table.expected_risk[kind]) <= 4 * r.se + 1e-12

    def test_excess_risk_subtracts_noise_floor(self):
        report = af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                        canonical_config(), None, 50)
        kind = af.RuleKind.F_PLUS
        assert report.excess_risk(kind).value == pytest.approx(
            report.rule(kind).expected_risk.value - 1.0)

    def test_rows_follow_schema(self):
        report = af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                        canonical_config(), [af.RuleKind.D0], 3)
        rows = report.to_rows()
        assert all(len(row) == 7 for row in rows)
        quantities = [row[2] for row in rows]
        assert quantities == ["disparity", "avg_disparity", "risk0_g0", "risk0_g1",
                              "risk", "expected_risk"]
        assert rows[0][0] == "d0"
        assert {row[5] for row in rows} == {3}

    def test_json_dict_round_trips_through_json(self):
        import json
        report = af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                        canonical_config(), None, 4)
        blob = json.dumps(report.to_json_dict(include_excess=True), sort_keys=True)
        parsed = json.loads(blob)
        assert parsed["reps"] == 4
        assert len(parsed["rules"]) == 5
        assert "excess_risk" in parsed["rules"][0]

    def test_rejects_zero_reps(self):
        with pytest.raises(af.ConfigError):
            af.mc_expected_metrics(canonical_spec(), canonical_prior(),
                                   canonical_config(), None, 0)


class TestBiasVariance:
    def test_unassisted_decision_has_zero_variance(self):
        decomp = af.bias_variance_decomp(canonical_spec(), canonical_prior(),
                                         canonical_config(), af.RuleKind.D0, 200)
        for cell, bv in decomp.items():
            assert bv.variance == 0.0
            assert bv.bias == pytest.approx(canonical_prior().beta[cell], abs=1e-12)

    def test_assisted_variances_match_closed_forms(self):
        # At sigma_sq = tau_sq = 1, n = 8: Var(d+) = 2*n*sigma^2*tau^4 /
        # (n*tau_sq + 2*sigma_sq)^2 = 0.16 per cell and the blind variant
        # halves it by averaging the two cell means.
        spec, prior, config = canonical_spec(), canonical_prior(), canonical_config()
        reps = 40000
        plus = af.bias_variance_decomp(spec, prior, config, af.RuleKind.D_PLUS, reps)
        minus = af.bias_variance_decomp(spec, prior, config, af.RuleKind.D_MINUS, reps)
        for cell in spec.cells():
            assert abs(plus[cell].variance - 0.16) <= 4 * plus[cell].variance_se
            assert abs(minus[cell].variance - 0.08) <= 4 * minus[cell].variance_se
            ratio = plus[cell].variance / minus[cell].variance
            assert ratio == pytest.approx(2.0, abs=0.15)

    def test_aware_bias_shrinks_prior_miss(self):
        # E[d+] - mu = sigma_sq*(beta - mu) / (sigma_sq + n_cell*tau_sq)
        spec, prior, config = canonical_spec(), canonical_prior(), canonical_config()
        decomp = af.bias_variance_decomp(spec, prior, config, af.RuleKind.D_PLUS, 40000)
        for (x, g), bv in decomp.items():
            want = (1.0 * (prior.beta[(x, g)] - spec.mu(x, g))) / (1.0 + 4 * 1.0)
            assert abs(bv.bias - want) <= 4 * bv.bias_se

    def test_requires_two_reps(self):
        with pytest.raises(af.ConfigError):
            af.bias_variance_decomp(canonical_spec(), canonical_prior(),
                                    canonical_config(), af.RuleKind.D0, 1)
