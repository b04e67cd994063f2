"""Age-of-Information analysis for bufferless status-update queues under
adversarial negative arrivals: closed-form age moments, worst-case bounds,
and a ground-truth discrete-event simulator."""

from .analytic import (
    AgeMoments,
    age_moments,
    average_aoi,
    average_paoi,
    delivery_probability,
    system_time_mean,
    system_time_mgf,
)
from .bounds import BoundPair, bound_pair, lower_bound, upper_bound
from .distributions import (
    Deterministic,
    ErlangK,
    Exponential,
    HyperExp2,
    Pareto,
    ServiceModel,
    SlowdownModel,
)
from .scenario import Scenario
from .simulator import SimEstimate, run_batch, run_single

__all__ = [
    "AgeMoments",
    "BoundPair",
    "Deterministic",
    "ErlangK",
    "Exponential",
    "HyperExp2",
    "Pareto",
    "Scenario",
    "ServiceModel",
    "SimEstimate",
    "SlowdownModel",
    "age_moments",
    "average_aoi",
    "average_paoi",
    "bound_pair",
    "delivery_probability",
    "lower_bound",
    "run_batch",
    "run_single",
    "system_time_mean",
    "system_time_mgf",
    "upper_bound",
]
