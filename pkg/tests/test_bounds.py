"""Bound tests: baseline reduction, sandwich property, cap monotonicity."""

import pytest

from aoiq import analytic as an
from aoiq import bounds
from aoiq.distributions import ErlangK, Exponential, HyperExp2, Pareto
from aoiq.errors import ScenarioError
from aoiq.scenario import Scenario

SERVICES = [Pareto(1.0, 3.0), ErlangK(2, 4.0 / 3.0), HyperExp2(0.5, 1.0, 0.5)]


class TestLowerBound:
    def test_baseline_reduction_examples(self):
        scn = Scenario((2.0, 1.0), 1, ErlangK(2, 4.0 / 3.0), 1.5)
        assert bounds.lower_bound(scn, 0, baseline=True) == pytest.approx(2.0)
        scn = Scenario((1.0, 1.0), 1, Pareto(1.0, 3.0), 1.5)
        assert bounds.lower_bound(scn, 0, baseline=True) == pytest.approx(2.5)

    def test_baseline_is_exact_identity(self):
        # service mean + inverse source rate, to machine precision
        for service in SERVICES:
            for lam1 in (0.2, 0.6, 1.0, 1.8, 3.0):
                scn = Scenario((lam1, 1.0), 1, service, 1.5)
                assert bounds.lower_bound(scn, 0, baseline=True) == service.mean() + 1.0 / lam1

    def test_non_baseline_uses_conditional_system_time(self):
        scn = Scenario((1.0, 1.0), 1, Exponential(2.0), 1.5)
        assert bounds.lower_bound(scn, 0) == pytest.approx(4.0 / 3.0)


class TestUpperBound:
    def test_sandwich_on_grid(self):
        for service in SERVICES:
            for lam_c in (0.5, 1.0, 1.5, 2.0):
                for beta in (1.1, 1.5, 2.0):
                    scn = Scenario((1.0, lam_c), 1, service, beta)
                    exact = an.average_aoi(scn)
                    assert bounds.lower_bound(scn, 0, baseline=True) <= exact
                    assert exact <= bounds.upper_bound(scn, 0)

    def test_monotone_in_caps(self):
        service = ErlangK(2, 4.0 / 3.0)
        prev = 0.0
        for lam_max, beta_max in ((1.0, 1.5), (1.5, 1.75), (2.0, 2.0)):
            scn = Scenario((1.0, 0.5), 1, service, 1.25, lambda_max=lam_max, beta_max=beta_max)
            ub = bounds.upper_bound(scn, 0)
            assert ub >= prev
            prev = ub

    def test_collapse_limit(self):
        # caps shrinking to no-adversary: gap tends to E[Y^2]/(2E[Y]) - 1/lam
        service = Exponential(2.0)
        scn = Scenario((1.0, 1e-6), 1, service, 1.0 + 2e-6, lambda_max=1e-5, beta_max=1.0 + 1e-5)
        gap = bounds.upper_bound(scn, 0) - bounds.lower_bound(scn, 0, baseline=True)
        base = Scenario.baseline((1.0,), service)
        ey, ey2 = an.interdeparture_moments_exact(base)
        assert gap == pytest.approx(ey2 / (2.0 * ey) - 1.0, rel=1e-3)

    def test_cap_violation(self):
        scn = Scenario((1.0, 2.0), 1, Exponential(2.0), 2.0)
        object.__setattr__(scn, "lambda_max", 1.0)
        with pytest.raises(ScenarioError):
            bounds.upper_bound(scn, 0)

    def test_at_caps_is_conservative(self):
        scn = Scenario((1.0, 0.5), 1, ErlangK(2, 4.0 / 3.0), 1.25)
        assert bounds.upper_bound(scn, 0, at_caps=True) >= bounds.upper_bound(scn, 0)


class TestBoundPair:
    def test_ordering_and_echo(self):
        scn = Scenario((1.0, 1.0), 1, ErlangK(2, 4.0 / 3.0), 1.5)
        pair = bounds.bound_pair(scn, 0)
        assert 0.0 < pair.lower <= pair.upper <= pair.upper_conservative
        assert pair.worst_case["lambdas"][1] == scn.lambda_max
        assert pair.worst_case["beta"] == scn.beta_max
