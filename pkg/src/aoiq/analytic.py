"""Closed-form age analysis of the adversarial bufferless M/G/1/1 system.

Two evaluation modes coexist:

* ``paper``: literal evaluation of the closed-form semi-Markov cycle MGFs
  (idle wait, conditional service sojourns, slow-state sojourns) together
  with their geometric closed form.  The literal cycle MGF is NOT
  normalized at s = 0 (its value there is p_d * (1 - p_d)); a normalized
  variant is exposed and is what the age formulas consume.
* ``exact``: first-step (one-step conditioning) analysis of the canonical
  event semantics implemented by the simulator module, so that analytics
  and simulation describe provably the same system.

All MGF arguments stay at or below zero (or within a small differentiation
neighborhood), which keeps every service variant, including the
heavy-tailed Pareto, inside its convergence region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import numdiff
from .errors import ConvergenceError, ScenarioError
from .scenario import Scenario

# window around a removable pole inside which series evaluation is used
_POLE_WINDOW = 1e-7

MODES = ("paper", "exact")


@dataclass(frozen=True)
class AgeMoments:
    """First-order age summary for one benign source."""

    mean_system_time: float
    mean_interdeparture: float
    second_interdeparture: float
    average_aoi: float
    average_paoi: float
    mode: str
    source: int


@dataclass(frozen=True)
class SojournSet:
    """The five conditional sojourn MGFs of the regeneration cycle."""

    w1: Callable[[float], float]
    w2: Callable[[float], float]
    w3: Callable[[float], float]
    w4: Callable[[float], float]
    w5: Callable[[float], float]
    p_d: float
    p_f: float


def _resolve_source(scn: Scenario, source: Optional[int]) -> int:
    if source is None:
        return scn.first_benign()
    if source == scn.adversary_index:
        raise ScenarioError(f"source {source} is the adversary; age metrics apply to benign sources")
    if not 0 <= source < len(scn.lambdas):
        raise ScenarioError(f"source index {source} out of range")
    return source


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def delivery_probability(scn: Scenario) -> float:
    """Probability a normal-mode service finishes before a negative arrival."""
    return scn.service.mgf(-scn.adversary_rate)


def system_time_mgf(scn: Scenario, s: float) -> float:
    """MGF of the system time of a delivered update (conditional-service form)."""
    lam_c = scn.adversary_rate
    return scn.service.mgf(s - lam_c) / scn.service.mgf(-lam_c)


def system_time_mean(scn: Scenario) -> float:
    """Mean of the conditional-service system time (first moment of its pdf)."""
    lam_c = scn.adversary_rate
    return scn.service.mgf_deriv(-lam_c, 1) / scn.service.mgf(-lam_c)


def _interrupted_mgf(model, rate: float, s: float) -> float:
    """E[e^{s*min(S,E)} ; E < S] / Pr(E < S) for E ~ Exp(rate), as a normalized MGF.

    This is the sojourn of a service attempt cut short by an exponential
    interruption.  The printed form has a removable singularity at s = rate,
    handled by a short series in the model's moments.
    """
    x = s - rate
    p_complete = model.mgf(-rate)
    if abs(x) < _POLE_WINDOW:
        # (M(x)-1)/x = m1 + m2 x/2 + O(x^2); enough accuracy inside the window
        m1 = model.moment(1)
        try:
            m2 = model.moment(2)
        except Exception:
            m2 = 0.0
        series = m1 + m2 * x / 2.0
        return rate * series / (1.0 - p_complete)
    return rate * (model.mgf(x) - 1.0) / (x * (1.0 - p_complete))


def sojourn_mgfs(scn: Scenario, source: Optional[int] = None) -> SojournSet:
    """The five cycle sojourn MGFs for the given benign source.

    Requires an active adversary: the preemption-conditioned sojourns are
    undefined when the attack rate is zero.
    """
    i = _resolve_source(scn, source)
    lam_i = scn.rate_of(i)
    lam_c = scn.adversary_rate
    if lam_c <= 0:
        raise ScenarioError("sojourn decomposition requires a positive adversary rate")
    total = scn.total_rate
    normal = scn.service
    slow = scn.slow_service()
    p_d = normal.mgf(-lam_c)
    p_f = slow.mgf(-total)

    def w1(s: float) -> float:
        return lam_i / (lam_i - s)

    def w2(s: float) -> float:
        return normal.mgf(s - lam_c) / p_d

    def w3(s: float) -> float:
        return _interrupted_mgf(normal, lam_c, s)

    def w4(s: float) -> float:
        return slow.mgf(s - total) / p_f

    def w5(s: float) -> float:
        return _interrupted_mgf(slow, total, s)

    return SojournSet(w1=w1, w2=w2, w3=w3, w4=w4, w5=w5, p_d=p_d, p_f=p_f)


def interdeparture_mgf_paper(
    scn: Scenario, s: float, source: Optional[int] = None, normalized: bool = False
) -> float:
    """Literal semi-Markov cycle MGF (geometric closed form over the slow loop).

    The literal value at s = 0 is p_d * (1 - p_d), not 1; pass
    ``normalized=True`` for the variant rescaled to 1 at the origin, which
    is what the age formulas use.

    With no adversary the cycle degenerates to idle wait plus one normal
    service and the same value is returned for both variants.
    """
    if scn.adversary_rate <= 0:
        i = _resolve_source(scn, source)
        lam_i = scn.rate_of(i)
        return lam_i / (lam_i - s) * scn.service.mgf(s)
    sj = sojourn_mgfs(scn, source)
    ratio = (1.0 - sj.p_f) * sj.w4(s)
    if ratio >= 1.0:
        raise ConvergenceError(f"geometric cycle series diverges: (1-p_f) E[e^(s W4)] = {ratio} >= 1")
    value = (
        sj.p_d
        * sj.p_f
        * (1.0 - sj.p_d)
        * sj.w1(s)
        * sj.w2(s)
        * sj.w3(s)
        * sj.w5(s)
        / (1.0 - ratio)
    )
    if normalized:
        return value / (sj.p_d * (1.0 - sj.p_d))
    return value


def interdeparture_mgf_paper_series(
    scn: Scenario, s: float, source: Optional[int] = None, terms: int = 200
) -> float:
    """Truncated-sum evaluation of the literal cycle MGF (testing aid)."""
    sj = sojourn_mgfs(scn, source)
    base = sj.p_d * sj.p_f * (1.0 - sj.p_d) * sj.w1(s) * sj.w2(s) * sj.w3(s) * sj.w5(s)
    ratio = (1.0 - sj.p_f) * sj.w4(s)
    total = 0.0
    term = base
    for _ in range(terms + 1):
        total += term
        term *= ratio
    return total


# ---------------------------------------------------------------------------
# exact mode: first-step analysis of the canonical semantics
# ---------------------------------------------------------------------------


def _tail_ratio_derivs(model, x: float):
    """Value and first two derivatives of h(x) = (M(x) - 1)/x at x != 0."""
    m0 = model.mgf(x)
    m1 = model.mgf_deriv(x, 1)
    m2 = model.mgf_deriv(x, 2)
    h0 = (m0 - 1.0) / x
    h1 = (m1 - h0) / x
    h2 = (m2 - 2.0 * h1) / x
    return h0, h1, h2


def _solve2(a11, a12, a21, a22, r1, r2):
    det = a11 * a22 - a12 * a21
    return (r1 * a22 - a12 * r2) / det, (a11 * r2 - r1 * a21) / det


def occupation_moments(scn: Scenario) -> tuple[float, float]:
    """First two moments of the occupation time of one accepted update.

    The occupation time runs from the instant an update seizes the idle
    server until its delivery, spanning any preemption/slowdown/expiry
    episodes.  Under the canonical semantics this is also the system time
    of a delivered update.
    """
    lam_c = scn.adversary_rate
    normal = scn.service
    if lam_c <= 0:
        return normal.moment(1), normal.moment(2)
    total = scn.total_rate          # slow-state expiry clock rate
    nu = total + lam_c              # expiry and fresh negatives compete in slow state
    slow = scn.slow_service()

    # normal state: completion vs negative arrival Exp(lam_c)
    a_d0 = normal.mgf(-lam_c)
    a_d1 = normal.mgf_deriv(-lam_c, 1)
    a_d2 = normal.mgf_deriv(-lam_c, 2)
    h0, h1, h2 = _tail_ratio_derivs(normal, -lam_c)
    a_j0 = lam_c * h0               # equals 1 - a_d0
    a_j1 = lam_c * h1
    a_j2 = lam_c * h2

    # slow state: completion vs combined interruption Exp(nu)
    c_f0 = slow.mgf(-nu)
    c_f1 = slow.mgf_deriv(-nu, 1)
    c_f2 = slow.mgf_deriv(-nu, 2)
    g0, g1, g2 = _tail_ratio_derivs(slow, -nu)
    c_i0 = nu * g0
    c_i1 = nu * g1
    c_i2 = nu * g2

    w_expiry = total / nu           # interruption resolves to expiry
    w_restart = lam_c / nu          # ... or to a slow restart

    # first moments: b_n = E[tau_n] + P(preempt) b_s ; analogous in slow state
    a1 = a_d1 + a_j1
    c1 = c_f1 + c_i1
    b1_n, b1_s = _solve2(
        1.0, -a_j0,
        -c_i0 * w_expiry, 1.0 - c_i0 * w_restart,
        a1, c1,
    )

    a2 = a_d2 + a_j2
    c2 = c_f2 + c_i2
    b2_n, b2_s = _solve2(
        1.0, -a_j0,
        -c_i0 * w_expiry, 1.0 - c_i0 * w_restart,
        a2 + 2.0 * a_j1 * b1_s,
        c2 + 2.0 * c_i1 * (w_expiry * b1_n + w_restart * b1_s),
    )
    return b1_n, b2_n


def occupation_mgf(scn: Scenario, s: float) -> float:
    """MGF of the occupation time (exact-mode system time)."""
    lam_c = scn.adversary_rate
    normal = scn.service
    if lam_c <= 0:
        return normal.mgf(s)
    total = scn.total_rate
    nu = total + lam_c
    slow = scn.slow_service()

    x = s - lam_c
    g_d = normal.mgf(x)
    if abs(x) < _POLE_WINDOW:
        g_j = lam_c * normal.moment(1)
    else:
        g_j = lam_c * (g_d - 1.0) / x
    y = s - nu
    e_f = slow.mgf(y)
    e_i = nu * (e_f - 1.0) / y
    w_expiry = total / nu
    w_restart = lam_c / nu
    denom = 1.0 - e_i * w_restart
    return (g_d + g_j * e_f / denom) / (1.0 - g_j * e_i * w_expiry / denom)


def interdeparture_moments_exact(
    scn: Scenario, source: Optional[int] = None
) -> tuple[float, float]:
    """First two moments of the delivery-to-delivery cycle of one source.

    The cycle is a geometric number of (idle wait + occupation) blocks:
    every accepted update is eventually delivered, and an accepted update
    belongs to the tagged source with probability lam_i / lam_benign.
    """
    i = _resolve_source(scn, source)
    lam_b = scn.benign_rate
    p = scn.rate_of(i) / lam_b
    b1, b2 = occupation_moments(scn)
    ec = 1.0 / lam_b + b1
    ec2 = 2.0 / lam_b**2 + 2.0 * b1 / lam_b + b2
    ey = ec / p
    ey2 = ec2 / p + 2.0 * (1.0 - p) * ec * ec / (p * p)
    return ey, ey2


def interdeparture_mgf_exact(scn: Scenario, s: float, source: Optional[int] = None) -> float:
    """Exact-mode cycle MGF (geometric compound of idle + occupation blocks)."""
    i = _resolve_source(scn, source)
    lam_b = scn.benign_rate
    p = scn.rate_of(i) / lam_b
    block = lam_b / (lam_b - s) * occupation_mgf(scn, s)
    if (1.0 - p) * block >= 1.0:
        raise ConvergenceError("geometric cycle series diverges in exact mode")
    return p * block / (1.0 - (1.0 - p) * block)


# ---------------------------------------------------------------------------
# age metrics
# ---------------------------------------------------------------------------


def _diff_step(scn: Scenario, order: int = 1) -> float:
    # second differences need a coarser step: h^2 in the denominator amplifies
    # floating-point cancellation at the first-derivative step size
    base = 1e-4 if order == 1 else 1e-2
    return base / scn.total_rate if scn.total_rate > 0 else base


def _derivative_ladder(f, h0: float, order: int = 1) -> float:
    """Differentiate f at 0, shrinking the step until the halving check passes.

    The literal cycle MGF can have a tiny convergence radius (the geometric
    denominator approaches its pole quickly for heavy-tailed slow service), so
    a fixed step is sometimes truncation dominated or lands outside the region
    where the MGF is finite.  Each retry shrinks the base step fourfold.
    """
    routine = numdiff.derivative if order == 1 else numdiff.second_derivative
    last: Exception | None = None
    for k in range(6):
        try:
            return routine(f, 0.0, h0 / 4.0**k)
        except ConvergenceError as exc:
            last = exc
    raise last  # type: ignore[misc]


def _paper_y_mean(scn: Scenario, source: int) -> float:
    f = lambda s: interdeparture_mgf_paper(scn, s, source, normalized=True)
    return _derivative_ladder(f, _diff_step(scn))


def aoi_mgf(scn: Scenario, source: Optional[int], mode: str, s: float) -> float:
    """MGF of the stationary AoI of a benign source; returns the limit 1 at s=0."""
    _check_mode(mode)
    i = _resolve_source(scn, source)
    if s == 0.0:
        return 1.0
    if mode == "paper":
        m_t = system_time_mgf(scn, s)
        m_y = interdeparture_mgf_paper(scn, s, i, normalized=True)
        y_mean = _paper_y_mean(scn, i)
    else:
        m_t = occupation_mgf(scn, s)
        m_y = interdeparture_mgf_exact(scn, s, i)
        y_mean = interdeparture_moments_exact(scn, i)[0]
    return m_t * (m_y - 1.0) / (s * y_mean)


def paoi_mgf(scn: Scenario, source: Optional[int], mode: str, s: float) -> float:
    """MGF of the stationary peak AoI (product of system-time and cycle MGFs)."""
    _check_mode(mode)
    i = _resolve_source(scn, source)
    if mode == "paper":
        return system_time_mgf(scn, s) * interdeparture_mgf_paper(scn, s, i, normalized=True)
    return occupation_mgf(scn, s) * interdeparture_mgf_exact(scn, s, i)


def average_aoi(scn: Scenario, source: Optional[int] = None, mode: str = "exact") -> float:
    _check_mode(mode)
    i = _resolve_source(scn, source)
    if mode == "exact":
        b1, _ = occupation_moments(scn)
        ey, ey2 = interdeparture_moments_exact(scn, i)
        return b1 + ey2 / (2.0 * ey)
    # the (M_Y(s) - 1)/s factor loses ~5 digits to cancellation near 0; a
    # step one decade coarser keeps the stencil above the noise floor while
    # Richardson still removes the truncation error
    f = lambda s: aoi_mgf(scn, i, "paper", s) if s != 0.0 else 1.0
    return _derivative_ladder(f, 10.0 * _diff_step(scn))


def average_paoi(scn: Scenario, source: Optional[int] = None, mode: str = "exact") -> float:
    _check_mode(mode)
    i = _resolve_source(scn, source)
    if mode == "exact":
        b1, _ = occupation_moments(scn)
        ey, _ = interdeparture_moments_exact(scn, i)
        return b1 + ey
    f = lambda s: paoi_mgf(scn, i, "paper", s)
    return _derivative_ladder(f, _diff_step(scn))


def age_moments(scn: Scenario, source: Optional[int] = None, mode: str = "exact") -> AgeMoments:
    """Bundle of the first-order age quantities for one benign source."""
    _check_mode(mode)
    i = _resolve_source(scn, source)
    if mode == "exact":
        b1, _ = occupation_moments(scn)
        ey, ey2 = interdeparture_moments_exact(scn, i)
        return AgeMoments(
            mean_system_time=b1,
            mean_interdeparture=ey,
            second_interdeparture=ey2,
            average_aoi=b1 + ey2 / (2.0 * ey),
            average_paoi=b1 + ey,
            mode=mode,
            source=i,
        )
    f = lambda s: interdeparture_mgf_paper(scn, s, i, normalized=True)
    ey = _derivative_ladder(f, _diff_step(scn))
    ey2 = _derivative_ladder(f, _diff_step(scn, order=2), order=2)
    return AgeMoments(
        mean_system_time=system_time_mean(scn),
        mean_interdeparture=ey,
        second_interdeparture=ey2,
        average_aoi=average_aoi(scn, i, "paper"),
        average_paoi=average_paoi(scn, i, "paper"),
        mode=mode,
        source=i,
    )
