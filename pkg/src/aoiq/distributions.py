"""Service-time distribution models.

Each model provides exact sampling, density/cdf, closed-form moments, and
MGF evaluation and differentiation at arguments inside its convergence
region.  The Pareto MGF has no elementary closed form and is evaluated by
adaptive quadrature on the transformed finite interval u = theta/t.

Repo-wide RNG convention: sampling takes a caller-owned ``random.Random``
instance (Mersenne Twister).  Replication seeds are derived with
``numpy.random.SeedSequence`` (see simulator module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

from scipy import integrate

from .errors import DistributionError, MgfDomainError, UndefinedMomentError

_QUAD_ABS_TOL = 1e-12
_QUAD_REL_TOL = 1e-12


class ServiceModel:
    """Common interface for the five service-time variants."""

    def mean(self) -> float:
        return self.moment(1)

    def moment(self, k: int) -> float:
        raise NotImplementedError

    def mgf(self, s: float) -> float:
        """E[exp(s*S)].  Raises MgfDomainError outside the convergence region."""
        raise NotImplementedError

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        """d^k/ds^k E[exp(s*S)] = E[S^k exp(s*S)], order <= 3."""
        raise NotImplementedError

    def pdf(self, t: float) -> float:
        raise NotImplementedError

    def cdf(self, t: float) -> float:
        raise NotImplementedError

    def sample(self, rng: Random) -> float:
        raise NotImplementedError

    def _check_order(self, order: int) -> None:
        if order not in (1, 2, 3):
            raise DistributionError(f"derivative order must be 1, 2 or 3, got {order}")

    def to_config(self) -> dict:
        raise NotImplementedError


def _require_positive(name: str, value: float) -> None:
    if not value > 0:
        raise DistributionError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class Exponential(ServiceModel):
    rate: float

    def __post_init__(self):
        _require_positive("rate", self.rate)

    def moment(self, k: int) -> float:
        return math.factorial(k) / self.rate**k

    def _check_domain(self, s: float) -> None:
        if s >= self.rate:
            raise MgfDomainError(f"MGF argument {s} >= rate {self.rate}")

    def mgf(self, s: float) -> float:
        self._check_domain(s)
        return self.rate / (self.rate - s)

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        self._check_order(order)
        self._check_domain(s)
        return math.factorial(order) * self.rate / (self.rate - s) ** (order + 1)

    def pdf(self, t: float) -> float:
        return self.rate * math.exp(-self.rate * t) if t >= 0 else 0.0

    def cdf(self, t: float) -> float:
        return 1.0 - math.exp(-self.rate * t) if t > 0 else 0.0

    def sample(self, rng: Random) -> float:
        return rng.expovariate(self.rate)

    def to_config(self) -> dict:
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class ErlangK(ServiceModel):
    shape: int
    rate: float

    def __post_init__(self):
        if not (isinstance(self.shape, int) and self.shape >= 1):
            raise DistributionError(f"shape must be a positive integer, got {self.shape}")
        _require_positive("rate", self.rate)

    def moment(self, k: int) -> float:
        # rising factorial shape*(shape+1)*...*(shape+k-1) over rate^k
        num = 1.0
        for j in range(k):
            num *= self.shape + j
        return num / self.rate**k

    def _check_domain(self, s: float) -> None:
        if s >= self.rate:
            raise MgfDomainError(f"MGF argument {s} >= rate {self.rate}")

    def mgf(self, s: float) -> float:
        self._check_domain(s)
        return (self.rate / (self.rate - s)) ** self.shape

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        self._check_order(order)
        self._check_domain(s)
        num = 1.0
        for j in range(order):
            num *= self.shape + j
        return num / self.rate**order * (self.rate / (self.rate - s)) ** (self.shape + order)

    def pdf(self, t: float) -> float:
        if t <= 0:
            return 0.0
        k, mu = self.shape, self.rate
        return mu**k * t ** (k - 1) * math.exp(-mu * t) / math.factorial(k - 1)

    def cdf(self, t: float) -> float:
        if t <= 0:
            return 0.0
        k, mu = self.shape, self.rate
        acc = 0.0
        term = 1.0
        for j in range(k):
            if j > 0:
                term *= mu * t / j
            acc += term
        return 1.0 - math.exp(-mu * t) * acc

    def sample(self, rng: Random) -> float:
        total = 0.0
        for _ in range(self.shape):
            total += rng.expovariate(self.rate)
        return total

    def to_config(self) -> dict:
        return {"kind": "erlang", "shape": self.shape, "rate": self.rate}


@dataclass(frozen=True)
class Pareto(ServiceModel):
    """Pareto with scale theta (support [theta, inf)) and shape alpha."""

    theta: float
    alpha: float

    def __post_init__(self):
        _require_positive("theta", self.theta)
        _require_positive("alpha", self.alpha)

    def moment(self, k: int) -> float:
        if k >= self.alpha:
            raise UndefinedMomentError(
                f"Pareto moment of order {k} undefined for shape alpha={self.alpha}"
            )
        return self.alpha * self.theta**k / (self.alpha - k)

    def _check_domain(self, s: float) -> None:
        if s > 0:
            raise MgfDomainError(f"Pareto MGF diverges for s={s} > 0")

    def mgf(self, s: float) -> float:
        self._check_domain(s)
        if s == 0:
            return 1.0
        return self._tail_quadrature(s, 0)

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        self._check_order(order)
        self._check_domain(s)
        if s == 0:
            return self.moment(order)
        return self._tail_quadrature(s, order)

    def _tail_quadrature(self, s: float, power: int) -> float:
        # E[S^power e^{sS}] with substitution u = theta/t onto (0, 1].
        alpha, theta = self.alpha, self.theta

        def integrand(u: float) -> float:
            if u <= 0.0:
                return 0.0
            return (theta / u) ** power * alpha * u ** (alpha - 1) * math.exp(s * theta / u)

        value, _ = integrate.quad(
            integrand, 0.0, 1.0, epsabs=_QUAD_ABS_TOL, epsrel=_QUAD_REL_TOL, limit=200
        )
        return value

    def pdf(self, t: float) -> float:
        if t < self.theta:
            return 0.0
        return self.alpha * self.theta**self.alpha * t ** (-self.alpha - 1)

    def cdf(self, t: float) -> float:
        if t < self.theta:
            return 0.0
        return 1.0 - (self.theta / t) ** self.alpha

    def sample(self, rng: Random) -> float:
        # inverse transform; 1 - random() lies in (0, 1]
        u = 1.0 - rng.random()
        return self.theta * u ** (-1.0 / self.alpha)

    def to_config(self) -> dict:
        return {"kind": "pareto", "theta": self.theta, "alpha": self.alpha}


@dataclass(frozen=True)
class HyperExp2(ServiceModel):
    """Order-2 hyper-exponential mixture: Exp(rate1) w.p. p, else Exp(rate2)."""

    p: float
    rate1: float
    rate2: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DistributionError(f"mixture probability must lie in [0, 1], got {self.p}")
        _require_positive("rate1", self.rate1)
        _require_positive("rate2", self.rate2)

    def moment(self, k: int) -> float:
        f = math.factorial(k)
        return self.p * f / self.rate1**k + (1.0 - self.p) * f / self.rate2**k

    def _check_domain(self, s: float) -> None:
        if s >= min(self.rate1, self.rate2):
            raise MgfDomainError(f"MGF argument {s} >= smallest rate")

    def mgf(self, s: float) -> float:
        self._check_domain(s)
        return self.p * self.rate1 / (self.rate1 - s) + (1.0 - self.p) * self.rate2 / (
            self.rate2 - s
        )

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        self._check_order(order)
        self._check_domain(s)
        f = math.factorial(order)
        return self.p * f * self.rate1 / (self.rate1 - s) ** (order + 1) + (
            1.0 - self.p
        ) * f * self.rate2 / (self.rate2 - s) ** (order + 1)

    def pdf(self, t: float) -> float:
        if t < 0:
            return 0.0
        return self.p * self.rate1 * math.exp(-self.rate1 * t) + (
            1.0 - self.p
        ) * self.rate2 * math.exp(-self.rate2 * t)

    def cdf(self, t: float) -> float:
        if t <= 0:
            return 0.0
        return 1.0 - self.p * math.exp(-self.rate1 * t) - (1.0 - self.p) * math.exp(
            -self.rate2 * t
        )

    def sample(self, rng: Random) -> float:
        if rng.random() < self.p:
            return rng.expovariate(self.rate1)
        return rng.expovariate(self.rate2)

    def to_config(self) -> dict:
        return {"kind": "hyperexp2", "p": self.p, "rate1": self.rate1, "rate2": self.rate2}


@dataclass(frozen=True)
class Deterministic(ServiceModel):
    value: float

    def __post_init__(self):
        _require_positive("value", self.value)

    def moment(self, k: int) -> float:
        return self.value**k

    def mgf(self, s: float) -> float:
        return math.exp(s * self.value)

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        self._check_order(order)
        return self.value**order * math.exp(s * self.value)

    def cdf(self, t: float) -> float:
        return 1.0 if t >= self.value else 0.0

    def sample(self, rng: Random) -> float:
        return self.value

    def to_config(self) -> dict:
        return {"kind": "deterministic", "value": self.value}


@dataclass(frozen=True)
class SlowdownModel(ServiceModel):
    """Deterministic time scaling S_slow = beta * S_base, beta > 1."""

    base: ServiceModel
    beta: float

    def __post_init__(self):
        if not self.beta > 1.0:
            raise DistributionError(f"slowdown factor must exceed 1, got {self.beta}")

    def moment(self, k: int) -> float:
        return self.beta**k * self.base.moment(k)

    def mgf(self, s: float) -> float:
        return self.base.mgf(self.beta * s)

    def mgf_deriv(self, s: float, order: int = 1) -> float:
        return self.beta**order * self.base.mgf_deriv(self.beta * s, order)

    def pdf(self, t: float) -> float:
        return self.base.pdf(t / self.beta) / self.beta

    def cdf(self, t: float) -> float:
        return self.base.cdf(t / self.beta)

    def sample(self, rng: Random) -> float:
        return self.beta * self.base.sample(rng)

    def to_config(self) -> dict:
        return {"kind": "slowdown", "beta": self.beta, "base": self.base.to_config()}


_KINDS = {
    "exponential": (Exponential, ("rate",)),
    "erlang": (ErlangK, ("shape", "rate")),
    "pareto": (Pareto, ("theta", "alpha")),
    "hyperexp2": (HyperExp2, ("p", "rate1", "rate2")),
    "deterministic": (Deterministic, ("value",)),
}


def from_config(spec: dict) -> ServiceModel:
    """Build a ServiceModel from its JSON object form: {"kind": ..., params}."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DistributionError("distribution spec must be an object with a 'kind' key")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise DistributionError(f"unknown distribution kind {kind!r}")
    cls, fields = _KINDS[kind]
    extra = set(spec) - {"kind", *fields}
    if extra:
        raise DistributionError(f"unexpected keys for {kind}: {sorted(extra)}")
    missing = [f for f in fields if f not in spec]
    if missing:
        raise DistributionError(f"missing keys for {kind}: {missing}")
    kwargs = {f: spec[f] for f in fields}
    if kind == "erlang":
        kwargs["shape"] = int(kwargs["shape"])
    return cls(**kwargs)
