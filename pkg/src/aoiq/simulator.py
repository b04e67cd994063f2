"""Discrete-event Monte Carlo simulation of the adversarial M/G/1/1 system.

The event loop below is the canonical semantics the analytic exact mode is
derived from:

* benign sources and the adversary are independent Poisson streams;
* an idle server accepts a positive arrival (generation time = arrival
  instant) and starts a fresh normal service draw;
* positive arrivals while busy are dropped (bufferless, no self-preemption);
* negative arrivals are no-ops when idle, preempt normal service into slow
  service (fresh beta-scaled draw plus a fresh exponential expiry clock at
  the aggregate rate), and restart slow service when already slow;
* the expiry clock returns the server to normal service with a fresh draw;
* a completion in either state delivers the update, whose generation time
  was retained across preemptions.

Benign arrivals are generated as one merged Poisson stream; the owning
source is drawn only when an arrival is accepted (Poisson thinning), which
does not change the law of the process.  Event ties (probability zero in
continuous time) resolve by kind priority completion < expiry < arrival,
negative before positive.

Replication seeds derive from the base seed via
``numpy.random.SeedSequence(base_seed).spawn(runs)``; each replication owns
a ``random.Random`` seeded with its child sequence.  Set the environment
variable ``AOIQ_WORKERS`` above 1 to run replications in parallel
processes; aggregation order is fixed by replication index either way.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from numpy.random import SeedSequence
from scipy import stats as _scipy_stats

from .errors import InsufficientDataError, ScenarioError
from .scenario import Scenario

_IDLE, _NORMAL, _SLOW = 0, 1, 2

WORKERS_ENV_VAR = "AOIQ_WORKERS"


@dataclass
class SourceStats:
    """Post-warmup statistics of one benign source in a single run."""

    deliveries: int = 0
    window: float = 0.0
    age_integral: float = 0.0
    sum_t: float = 0.0
    sum_t2: float = 0.0
    sum_y: float = 0.0
    sum_y2: float = 0.0
    sum_peak: float = 0.0
    generation_times: Optional[list] = None
    delivery_times: Optional[list] = None

    @property
    def time_average_age(self) -> float:
        return self.age_integral / self.window

    @property
    def mean_system_time(self) -> float:
        return self.sum_t / self.deliveries

    @property
    def mean_interdeparture(self) -> float:
        return self.sum_y / self.deliveries

    @property
    def second_interdeparture(self) -> float:
        return self.sum_y2 / self.deliveries

    @property
    def mean_peak(self) -> float:
        return self.sum_peak / self.deliveries


@dataclass
class RunResult:
    seed: int
    sources: dict
    counters: dict
    elapsed: float


@dataclass
class SourceEstimate:
    aaoi: float
    aaoi_halfwidth: float
    paoi: float
    paoi_halfwidth: float
    mean_system_time: float
    mean_interdeparture: float
    second_interdeparture: float
    aaoi_runs: list
    paoi_runs: list

    def to_dict(self) -> dict:
        return {
            "aaoi": self.aaoi,
            "aaoi_ci": [self.aaoi - self.aaoi_halfwidth, self.aaoi + self.aaoi_halfwidth],
            "paoi": self.paoi,
            "paoi_ci": [self.paoi - self.paoi_halfwidth, self.paoi + self.paoi_halfwidth],
            "mean_system_time": self.mean_system_time,
            "mean_interdeparture": self.mean_interdeparture,
            "second_interdeparture": self.second_interdeparture,
        }


@dataclass
class SimEstimate:
    """Across-run aggregates with Student-t confidence intervals."""

    sources: dict
    runs: int
    confidence: float
    base_seed: int
    run_seeds: list

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "confidence": self.confidence,
            "seed_ledger": {"base_seed": self.base_seed, "run_seeds": self.run_seeds},
            "sources": {str(k): v.to_dict() for k, v in sorted(self.sources.items())},
        }


def peak_age_samples(generation_times, delivery_times) -> list:
    """Per-delivery age peaks: delivery gap plus the previous system time."""
    if len(delivery_times) < 2 or len(generation_times) != len(delivery_times):
        raise InsufficientDataError("need at least two matched (generation, delivery) pairs")
    return [
        delivery_times[j] - generation_times[j - 1] for j in range(1, len(delivery_times))
    ]


def run_single(
    scn: Scenario,
    deliveries: Optional[int] = None,
    time_horizon: Optional[float] = None,
    warmup_fraction: float = 0.1,
    seed: int = 1,
    collect_samples: bool = False,
    trace_path: Optional[str] = None,
    max_trace_events: int = 100_000,
) -> RunResult:
    """One replication.  ``deliveries`` is the post-warmup delivery target per
    benign source (preferred); ``time_horizon`` runs on simulated time instead.
    Deterministic for fixed (scenario, horizon, seed)."""
    if (deliveries is None) == (time_horizon is None):
        raise ValueError("specify exactly one of deliveries or time_horizon")
    if deliveries is not None and deliveries < 1:
        raise ValueError("deliveries target must be positive")
    if not 0.0 <= warmup_fraction < 1.0:
        raise ValueError("warmup fraction must lie in [0, 1)")

    rng = Random(seed)
    service = scn.service
    beta = scn.beta
    lam_c = scn.adversary_rate
    lam_b = scn.benign_rate
    total = scn.total_rate
    benign = scn.benign_indices
    nb = len(benign)
    # cumulative source-selection thresholds for accepted arrivals
    cum = []
    acc = 0.0
    for idx in benign:
        acc += scn.rate_of(idx) / lam_b
        cum.append(acc)

    if deliveries is not None:
        warm_count = max(1, math.ceil(warmup_fraction * deliveries))
        target = deliveries
        time_cutoff = 0.0
        end_time = math.inf
    else:
        warm_count = 1
        target = None
        time_cutoff = warmup_fraction * time_horizon
        end_time = time_horizon

    expovariate = rng.expovariate
    random01 = rng.random
    sample_service = service.sample

    per_source = {idx: SourceStats() for idx in benign}
    if collect_samples:
        for st in per_source.values():
            st.generation_times = []
            st.delivery_times = []
    # per-source bookkeeping: total deliveries, last delivery instant, last T
    count = {idx: 0 for idx in benign}
    prev_deliv = {idx: 0.0 for idx in benign}
    prev_t = {idx: 0.0 for idx in benign}
    window_start = {idx: 0.0 for idx in benign}
    pending = nb

    t = 0.0
    state = _IDLE
    owner = -1
    gen = 0.0
    completion = math.inf
    expiry = math.inf
    next_pos = expovariate(lam_b)
    next_neg = expovariate(lam_c) if lam_c > 0 else math.inf

    n_arrivals = 0
    n_dropped = 0
    n_accepted = 0
    n_negatives = 0
    n_noop_negatives = 0
    n_preemptions = 0
    n_slow_restarts = 0
    n_expiries = 0
    n_deliveries = 0
    busy_time = 0.0

    trace_rows = [] if trace_path is not None else None
    tagged = benign[0]

    while True:
        # next event: completion < expiry < arrival (negative before positive)
        t_next = completion
        kind = 0
        if expiry < t_next:
            t_next, kind = expiry, 1
        if next_neg < t_next:
            t_next, kind = next_neg, 2
        if next_pos < t_next:
            t_next, kind = next_pos, 3

        if t_next >= end_time:
            t = end_time
            break
        if state != _IDLE:
            busy_time += t_next - t
        t = t_next

        if kind == 0:
            # delivery
            n_deliveries += 1
            src = owner
            state = _IDLE
            owner = -1
            completion = math.inf
            expiry = math.inf
            k = count[src] + 1
            count[src] = k
            t_sys = t - gen
            if k == warm_count and t >= time_cutoff:
                window_start[src] = t
                prev_deliv[src] = t
                prev_t[src] = t_sys
                st = per_source[src]
                if st.generation_times is not None:
                    st.generation_times.append(gen)
                    st.delivery_times.append(t)
            elif k > warm_count and t >= time_cutoff:
                st = per_source[src]
                y = t - prev_deliv[src]
                pt = prev_t[src]
                st.deliveries += 1
                st.sum_t += t_sys
                st.sum_t2 += t_sys * t_sys
                st.sum_y += y
                st.sum_y2 += y * y
                st.sum_peak += y + pt
                st.age_integral += y * pt + 0.5 * y * y
                st.window = t - window_start[src]
                if st.generation_times is not None:
                    st.generation_times.append(gen)
                    st.delivery_times.append(t)
                prev_deliv[src] = t
                prev_t[src] = t_sys
                if target is not None and st.deliveries == deliveries:
                    pending -= 1
                    if pending == 0:
                        break
            elif time_cutoff > 0.0 and t < time_cutoff:
                # still warming up on a time horizon: re-anchor on this delivery
                count[src] = 0
        elif kind == 1:
            # slow period expires: resume normal service with a fresh draw
            n_expiries += 1
            state = _NORMAL
            completion = t + sample_service(rng)
            expiry = math.inf
        elif kind == 2:
            n_negatives += 1
            next_neg = t + expovariate(lam_c)
            if state == _NORMAL:
                n_preemptions += 1
                state = _SLOW
                completion = t + beta * sample_service(rng)
                expiry = t + expovariate(total)
            elif state == _SLOW:
                n_slow_restarts += 1
                completion = t + beta * sample_service(rng)
                expiry = t + expovariate(total)
            else:
                n_noop_negatives += 1
        else:
            n_arrivals += 1
            next_pos = t + expovariate(lam_b)
            if state == _IDLE:
                n_accepted += 1
                if nb == 1:
                    owner = tagged
                else:
                    u = random01()
                    owner = benign[-1]
                    for j in range(nb):
                        if u < cum[j]:
                            owner = benign[j]
                            break
                state = _NORMAL
                gen = t
                completion = t + sample_service(rng)
            else:
                n_dropped += 1

        if trace_rows is not None and len(trace_rows) < max_trace_events:
            age = t - prev_deliv[tagged] + prev_t[tagged] if count[tagged] > 0 else t
            trace_rows.append((t, kind, owner, state, age))

    counters = {
        "benign_arrivals": n_arrivals,
        "accepted": n_accepted,
        "dropped": n_dropped,
        "negative_arrivals": n_negatives,
        "noop_negatives": n_noop_negatives,
        "preemptions": n_preemptions,
        "slow_restarts": n_slow_restarts,
        "expiries": n_expiries,
        "deliveries": n_deliveries,
        "in_service": 1 if state != _IDLE else 0,
        "busy_time": busy_time,
    }
    if trace_rows is not None:
        _write_trace(trace_path, trace_rows)
    return RunResult(seed=seed, sources=per_source, counters=counters, elapsed=t)


def _write_trace(path, rows):
    kinds = {0: "completion", 1: "expiry", 2: "negative", 3: "positive"}
    states = {0: "idle", 1: "normal", 2: "slow"}
    with open(path, "w", newline="") as fh:
        fh.write("time,event,source,server_state,tagged_age\n")
        for t, kind, owner, state, age in rows:
            fh.write(f"{t:.17g},{kinds[kind]},{owner},{states[state]},{age:.17g}\n")


def derive_run_seeds(base_seed: int, runs: int) -> list:
    """Replication seeds: SeedSequence(base_seed).spawn(runs), one word each."""
    return [int(child.generate_state(1)[0]) for child in SeedSequence(base_seed).spawn(runs)]


def _replicate(args):
    scn, deliveries, time_horizon, warmup_fraction, seed = args
    return run_single(
        scn,
        deliveries=deliveries,
        time_horizon=time_horizon,
        warmup_fraction=warmup_fraction,
        seed=seed,
    )


def run_batch(
    scn: Scenario,
    runs: int = 12,
    deliveries: Optional[int] = None,
    time_horizon: Optional[float] = None,
    warmup_fraction: float = 0.1,
    base_seed: int = 1,
    confidence: float = 0.95,
    workers: Optional[int] = None,
) -> SimEstimate:
    """Independent replications aggregated with Student-t confidence intervals."""
    if runs < 2:
        raise ValueError("at least two runs are required for a confidence interval")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    seeds = derive_run_seeds(base_seed, runs)
    jobs = [(scn, deliveries, time_horizon, warmup_fraction, s) for s in seeds]
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, jobs))
    else:
        results = [_replicate(job) for job in jobs]

    tcrit = float(_scipy_stats.t.ppf(0.5 + confidence / 2.0, runs - 1))
    sources = {}
    for idx in scn.benign_indices:
        aaoi_runs = [r.sources[idx].time_average_age for r in results]
        paoi_runs = [r.sources[idx].mean_peak for r in results]
        sources[idx] = SourceEstimate(
            aaoi=_mean(aaoi_runs),
            aaoi_halfwidth=tcrit * _sem(aaoi_runs),
            paoi=_mean(paoi_runs),
            paoi_halfwidth=tcrit * _sem(paoi_runs),
            mean_system_time=_mean([r.sources[idx].mean_system_time for r in results]),
            mean_interdeparture=_mean([r.sources[idx].mean_interdeparture for r in results]),
            second_interdeparture=_mean([r.sources[idx].second_interdeparture for r in results]),
            aaoi_runs=aaoi_runs,
            paoi_runs=paoi_runs,
        )
    return SimEstimate(
        sources=sources, runs=runs, confidence=confidence, base_seed=base_seed, run_seeds=seeds
    )


def _mean(xs):
    return sum(xs) / len(xs)


def _sem(xs):
    n = len(xs)
    m = _mean(xs)
    var = sum((x - m) ** 2 for x in xs) / (n - 1)
    return math.sqrt(var / n)
