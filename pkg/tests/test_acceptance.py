"""Acceptance gate: one test per release criterion, one pass/fail line each.

Run with ``pytest -v tests/test_acceptance.py`` to get the per-criterion
verdict lines.  Budgeted to finish well inside the stated runtime limits on
a single core.
"""

import json
import math
import random

import numpy as np
import pytest

from aoiq import analytic as an
from aoiq import bounds, cli
from aoiq import simulator as sim
from aoiq.distributions import ErlangK, Exponential, HyperExp2, Pareto
from aoiq.scenario import Scenario

SERVICES = {
    "pareto": Pareto(1.0, 3.0),
    "erlang": ErlangK(2, 4.0 / 3.0),
    "hyperexp": HyperExp2(0.5, 1.0, 0.5),
}

GRID_LAMBDA1 = tuple(round(0.2 * (i + 1), 10) for i in range(15))


def _report(criterion: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    print(f"[{verdict}] {criterion}" + (f" — {detail}" if detail else ""))
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_service_mean_parity():
    """All three study distributions share E[S] = 1.5 analytically and empirically."""
    worst = 0.0
    for model in SERVICES.values():
        worst = max(worst, abs(model.mean() - 1.5))
        rng = random.Random(101)
        n = 1_000_000
        xs = [model.sample(rng) for _ in range(n)]
        mean = sum(xs) / n
        var = sum((x - mean) ** 2 for x in xs) / (n - 1)
        se = math.sqrt(var / n)
        if abs(mean - 1.5) >= 3.0 * se:
            _report("criterion 1: service-mean parity", False, f"{model}: MC mean {mean}")
    _report("criterion 1: service-mean parity", worst < 1e-9, f"max analytic gap {worst:.2e}")


def test_criterion_2_no_adversary_closed_form():
    """Exponential(2/3), rate-1 source, no adversary: AAoI 3.4 and mean peak 4.0."""
    scn = Scenario.baseline((1.0,), Exponential(2.0 / 3.0))
    aaoi = an.average_aoi(scn)
    paoi = an.average_paoi(scn)
    est = sim.run_batch(scn, runs=12, deliveries=100_000, base_seed=2).sources[0]
    ok = (
        abs(aaoi - 3.4) < 1e-9
        and abs(paoi - 4.0) < 1e-9
        and abs(est.aaoi - 3.4) < est.aaoi_halfwidth
        and abs(est.paoi - 4.0) < est.paoi_halfwidth
    )
    _report(
        "criterion 2: no-adversary closed form",
        ok,
        f"analytic ({aaoi:.6f}, {paoi:.6f}); sim {est.aaoi:.4f}±{est.aaoi_halfwidth:.4f}, "
        f"{est.paoi:.4f}±{est.paoi_halfwidth:.4f}",
    )


def test_criterion_3_distribution_ordering():
    """Under attack the heavy tail hurts most: Pareto > Erlang > HyperExp2 AAoI."""
    results = {}
    for name, model in SERVICES.items():
        scn = Scenario((1.0, 1.5), 1, model, 1.5)
        results[name] = sim.run_batch(scn, runs=12, deliveries=100_000, base_seed=3).sources[0]
    par, erl, hyp = results["pareto"], results["erlang"], results["hyperexp"]
    ok = (
        par.aaoi - par.aaoi_halfwidth > erl.aaoi + erl.aaoi_halfwidth
        and erl.aaoi - erl.aaoi_halfwidth > hyp.aaoi + hyp.aaoi_halfwidth
    )
    _report(
        "criterion 3: distribution ordering",
        ok,
        f"pareto {par.aaoi:.3f} > erlang {erl.aaoi:.3f} > hyperexp {hyp.aaoi:.3f}",
    )


def test_criterion_4_bound_sandwich():
    """Simulated AAoI at (attack 1, slowdown 1.5) sits between the bounds on the
    rate grid, and the four-source curves sit above the two-source curves."""
    failures = []
    for name, model in SERVICES.items():
        for lam1 in GRID_LAMBDA1:
            two = Scenario((lam1, 1.0), 1, model, 1.5)
            four = Scenario((lam1, lam1, lam1, 1.0), 3, model, 1.5)
            lb = bounds.lower_bound(two, 0, baseline=True)
            ub = bounds.upper_bound(two, 0)
            est2 = sim.run_batch(two, runs=8, deliveries=2500, base_seed=4).sources[0]
            est4 = sim.run_batch(four, runs=8, deliveries=2500, base_seed=4).sources[0]
            if not lb <= est2.aaoi - est2.aaoi_halfwidth:
                failures.append(f"{name} lam1={lam1}: LB {lb:.3f} > sim-CI")
            if not est2.aaoi + est2.aaoi_halfwidth <= ub:
                failures.append(f"{name} lam1={lam1}: sim+CI > UB {ub:.3f}")
            if est4.aaoi + est4.aaoi_halfwidth < est2.aaoi - est2.aaoi_halfwidth:
                failures.append(f"{name} lam1={lam1}: N=4 curve below N=2")
    _report("criterion 4: bound sandwich on the rate grid", not failures, "; ".join(failures))


def test_criterion_5_attack_monotonicity():
    """AAoI is nondecreasing in the attack rate and in the slowdown factor."""
    failures = []
    model = SERVICES["erlang"]
    rates = (0.25, 0.5, 1.0, 1.5, 2.0)
    betas = (1.1, 1.5, 2.0)
    exact = {
        (lc, b): an.average_aoi(Scenario((1.0, lc), 1, model, b)) for lc in rates for b in betas
    }
    for b in betas:
        vals = [exact[(lc, b)] for lc in rates]
        if vals != sorted(vals):
            failures.append(f"exact not monotone in attack rate at beta={b}")
    for lc in rates:
        vals = [exact[(lc, b)] for b in betas]
        if vals != sorted(vals):
            failures.append(f"exact not monotone in slowdown at rate={lc}")
    # simulator agrees up to CI overlap along the attack-rate axis
    ests = [
        sim.run_batch(Scenario((1.0, lc), 1, model, 1.5), runs=8, deliveries=5000, base_seed=5)
        .sources[0]
        for lc in rates
    ]
    for prev, nxt in zip(ests, ests[1:]):
        if nxt.aaoi + nxt.aaoi_halfwidth < prev.aaoi - prev.aaoi_halfwidth:
            failures.append("simulated trend decreases beyond CI overlap")
    _report("criterion 5: monotone degradation under attack", not failures, "; ".join(failures))


def test_criterion_6_analytic_simulation_equivalence():
    """Exact-mode AAoI and mean peak age inside the 99% simulation CI on a
    12-scenario grid."""
    failures = []
    for name, model in SERVICES.items():
        for lam_c in (0.5, 1.5):
            for beta in (1.25, 2.0):
                scn = Scenario((1.0, lam_c), 1, model, beta)
                aaoi = an.average_aoi(scn)
                paoi = an.average_paoi(scn)
                est = sim.run_batch(
                    scn, runs=12, deliveries=40_000, base_seed=8, confidence=0.99
                ).sources[0]
                if abs(est.aaoi - aaoi) > est.aaoi_halfwidth:
                    failures.append(
                        f"{name} rate={lam_c} beta={beta}: AAoI {aaoi:.4f} outside "
                        f"{est.aaoi:.4f}±{est.aaoi_halfwidth:.4f}"
                    )
                if abs(est.paoi - paoi) > est.paoi_halfwidth:
                    failures.append(
                        f"{name} rate={lam_c} beta={beta}: peak {paoi:.4f} outside "
                        f"{est.paoi:.4f}±{est.paoi_halfwidth:.4f}"
                    )
    _report("criterion 6: analytic-simulation equivalence", not failures, "; ".join(failures))


def test_criterion_7_formula_fidelity():
    """Internal consistency of the literal closed forms."""
    failures = []
    scn = Scenario((1.0, 1.0), 1, Exponential(2.0), 1.5)
    p_d = an.delivery_probability(scn)
    literal = an.interdeparture_mgf_paper(scn, 0.0)
    if abs(literal - p_d * (1.0 - p_d)) > 1e-12:
        failures.append(f"literal cycle MGF at 0 is {literal}, not p_d(1-p_d)")

    # truncated sum vs geometric closed form where the 200-term tail is negligible
    for name, model in SERVICES.items():
        s_scn = Scenario((1.0, 1.0), 1, model, 1.5)
        sj = an.sojourn_mgfs(s_scn)
        for s in (-1.0, -0.5, -0.1, 0.0):
            ratio = (1.0 - sj.p_f) * sj.w4(s)
            if ratio**201 / (1.0 - ratio) > 1e-11:
                continue
            closed = an.interdeparture_mgf_paper(s_scn, s)
            truncated = an.interdeparture_mgf_paper_series(s_scn, s, terms=200)
            if abs(truncated - closed) > 1e-10 * max(1.0, abs(closed)):
                failures.append(f"{name} s={s}: truncated sum off by {abs(truncated - closed):.2e}")

    sj = an.sojourn_mgfs(scn)
    for label, w in (("w1", sj.w1), ("w2", sj.w2), ("w3", sj.w3), ("w4", sj.w4), ("w5", sj.w5)):
        if abs(w(0.0) - 1.0) > 1e-12:
            failures.append(f"sojourn {label} not normalized at 0")

    all_models = list(SERVICES.values()) + [Exponential(2.0)]
    from aoiq.distributions import Deterministic

    all_models.append(Deterministic(1.5))
    for model in all_models:
        m_scn = Scenario((1.0, 0.75), 1, model, 1.5)
        h = 1e-4 / m_scn.total_rate
        fd = (an.system_time_mgf(m_scn, h) - an.system_time_mgf(m_scn, -h)) / (2.0 * h)
        mean = an.system_time_mean(m_scn)
        if abs(fd - mean) > 1e-6 * abs(mean):
            failures.append(f"{model}: system-time MGF slope {fd} vs mean {mean}")
    _report("criterion 7: formula fidelity", not failures, "; ".join(failures))


def test_criterion_8_lower_bound_reduction():
    """Baseline lower bound is exactly mean service + 1/rate."""
    failures = []
    for name, model in SERVICES.items():
        for lam1 in GRID_LAMBDA1:
            scn = Scenario((lam1, 1.0), 1, model, 1.5)
            if bounds.lower_bound(scn, 0, baseline=True) != model.mean() + 1.0 / lam1:
                failures.append(f"{name} lam1={lam1}")
    _report("criterion 8: lower-bound reduction", not failures, "; ".join(failures))


def test_criterion_9_determinism(tmp_path, capsys):
    """Identical config and seed give byte-identical simulate output."""
    doc = {
        "sources": [{"rate": 1.0}],
        "adversary": {"rate": 1.0, "beta": 1.5},
        "service": {"kind": "erlang", "shape": 2, "rate": 4.0 / 3.0},
        "sim": {"runs": 4, "deliveries_per_run": 2000, "seed": 77},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    outputs = []
    for _ in range(2):
        assert cli.main(["simulate", "--config", str(path)]) == 0
        outputs.append(capsys.readouterr().out.encode())
    _report(
        "criterion 9: determinism",
        outputs[0] == outputs[1],
        f"{len(outputs[0])} output bytes compared",
    )
