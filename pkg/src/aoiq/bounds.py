"""Policy-independent lower bound and constrained worst-case upper bound on AAoI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import analytic
from .errors import ScenarioError
from .scenario import Scenario


@dataclass(frozen=True)
class BoundPair:
    """AAoI bounds for one benign source, with the parameters each side used.

    ``upper`` evaluates the system-time term at the scenario's own attack
    rate (the literal reading); ``upper_conservative`` evaluates it at the
    worst-case caps as well.
    """

    lower: float
    upper: float
    upper_conservative: float
    source: int
    scenario: dict
    worst_case: dict


def lower_bound(scn: Scenario, source: Optional[int] = None, baseline: bool = False) -> float:
    """E[T_i] + 1/lambda_i: the cycle can never beat the source's own arrivals.

    With ``baseline`` the system-time term is taken with no adversary and no
    slowdown, collapsing to mean service time + 1/lambda_i.
    """
    i = analytic._resolve_source(scn, source)
    lam_i = scn.rate_of(i)
    if baseline:
        mean_t = scn.service.mean()
    else:
        mean_t = analytic.system_time_mean(scn)
    return mean_t + 1.0 / lam_i


def upper_bound(scn: Scenario, source: Optional[int] = None, at_caps: bool = False) -> float:
    """Worst-case AAoI within the caps: attack rate and slowdown pushed to their limits.

    The cycle second-moment term always uses the worst-case policy; the
    system-time term uses the scenario's own attack rate unless ``at_caps``.
    Both terms are canonical (exact-mode) quantities so the bound covers the
    simulated system.
    """
    i = analytic._resolve_source(scn, source)
    if scn.adversary_rate > scn.lambda_max or scn.beta > scn.beta_max:
        raise ScenarioError("scenario already exceeds its adversary caps")
    worst = scn.with_attack(scn.lambda_max, scn.beta_max)
    ey, ey2 = analytic.interdeparture_moments_exact(worst, i)
    ref = worst if at_caps else scn
    mean_t = analytic.occupation_moments(ref)[0]
    return mean_t + ey2 / (2.0 * ey)


def bound_pair(scn: Scenario, source: Optional[int] = None, baseline_lower: bool = True) -> BoundPair:
    i = analytic._resolve_source(scn, source)
    worst = scn.with_attack(scn.lambda_max, scn.beta_max)
    return BoundPair(
        lower=lower_bound(scn, i, baseline=baseline_lower),
        upper=upper_bound(scn, i, at_caps=False),
        upper_conservative=upper_bound(scn, i, at_caps=True),
        source=i,
        scenario=scn.describe(),
        worst_case=worst.describe(),
    )
