"""Scenario definition: arrival rates, the compromised source, and caps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .distributions import ServiceModel, SlowdownModel
from .errors import ScenarioError


@dataclass(frozen=True)
class Scenario:
    """An N-source bufferless status-update system with one adversary.

    ``lambdas`` has one Poisson rate per source; ``adversary_index`` names
    the compromised one.  The adversary is bounded by the caps:
    rate <= lambda_max and 1 < beta <= beta_max.  The no-adversary baseline
    (rate 0, beta 1) is admitted through :meth:`baseline`.
    """

    lambdas: tuple[float, ...]
    adversary_index: int
    service: ServiceModel
    beta: float
    lambda_max: float = 2.0
    beta_max: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        n = len(self.lambdas)
        if n < 2:
            raise ScenarioError("at least two sources (one benign, one adversary) required")
        if not 0 <= self.adversary_index < n:
            raise ScenarioError(f"adversary index {self.adversary_index} out of range for {n} sources")
        for i, lam in enumerate(self.lambdas):
            if i == self.adversary_index:
                if lam < 0:
                    raise ScenarioError(f"adversary rate must be nonnegative, got {lam}")
            elif lam <= 0:
                raise ScenarioError(f"source {i} rate must be strictly positive, got {lam}")
        lam_c = self.lambdas[self.adversary_index]
        if lam_c > self.lambda_max:
            raise ScenarioError(
                f"bounded-threat violation: adversary rate {lam_c} exceeds lambda_max {self.lambda_max}"
            )
        if lam_c > 0:
            if not 1.0 < self.beta <= self.beta_max:
                raise ScenarioError(
                    f"bounded-threat violation: slowdown factor {self.beta} outside (1, {self.beta_max}]"
                )
        elif self.beta < 1.0:
            raise ScenarioError(f"slowdown factor must be >= 1, got {self.beta}")

    @classmethod
    def baseline(cls, lambdas, service, lambda_max=2.0, beta_max=2.0) -> "Scenario":
        """No-adversary scenario: adversary appended with rate 0, beta 1."""
        return cls(
            lambdas=tuple(lambdas) + (0.0,),
            adversary_index=len(tuple(lambdas)),
            service=service,
            beta=1.0,
            lambda_max=lambda_max,
            beta_max=beta_max,
        )

    @property
    def adversary_rate(self) -> float:
        return self.lambdas[self.adversary_index]

    @property
    def total_rate(self) -> float:
        """Aggregate rate of all sources, benign and adversarial."""
        return sum(self.lambdas)

    @property
    def benign_rate(self) -> float:
        return self.total_rate - self.adversary_rate

    @property
    def benign_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.lambdas)) if i != self.adversary_index)

    def rate_of(self, source: int) -> float:
        return self.lambdas[source]

    def slow_service(self) -> SlowdownModel:
        return SlowdownModel(self.service, self.beta)

    def with_attack(self, rate: float, beta: float) -> "Scenario":
        """Copy with a different adversary rate and slowdown factor."""
        lambdas = list(self.lambdas)
        lambdas[self.adversary_index] = rate
        return replace(self, lambdas=tuple(lambdas), beta=beta)

    def first_benign(self) -> int:
        return self.benign_indices[0]

    def describe(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "adversary_index": self.adversary_index,
            "beta": self.beta,
            "lambda_max": self.lambda_max,
            "beta_max": self.beta_max,
            "service": self.service.to_config(),
        }
