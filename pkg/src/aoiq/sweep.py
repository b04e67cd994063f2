"""Sweep orchestration, figure presets, CSV emission, and the validation report."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, fields
from typing import Optional

from numpy.random import SeedSequence

from . import analytic, bounds, config, simulator
from .errors import AoiqError, ConvergenceError, ScenarioError

CSV_COLUMNS = (
    "sweep_value",
    "analytic_paper",
    "analytic_exact",
    "lb",
    "ub",
    "sim_mean",
    "sim_ci_low",
    "sim_ci_high",
    "runs",
    "seed",
)

# lambda_1 grid for the canned experiment presets
PRESET_LAMBDA1_GRID = tuple(round(0.2 * k, 10) for k in range(1, 16))
FIG3_ATTACK_RATES = (0.0, 0.75, 1.5)
FIG3_BETA = 1.5
FIG4_ATTACK_RATE = 1.0
FIG4_BETA = 1.5

PRESET_SERVICES = {
    "pareto": {"kind": "pareto", "theta": 1.0, "alpha": 3.0},
    "erlang": {"kind": "erlang", "shape": 2, "rate": 4.0 / 3.0},
    "hyperexp": {"kind": "hyperexp2", "p": 0.5, "rate1": 1.0, "rate2": 0.5},
}


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    analytic_paper: Optional[float]
    analytic_exact: Optional[float]
    lb: Optional[float]
    ub: Optional[float]
    sim_mean: Optional[float]
    sim_ci_low: Optional[float]
    sim_ci_high: Optional[float]
    runs: Optional[int]
    seed: Optional[int]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def emit_csv(rows, path) -> None:
    """Write sweep rows with the fixed column contract; floats survive a round trip."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(getattr(row, f.name)) for f in fields(SweepRow)) + "\n")
    except OSError as exc:
        raise AoiqError(f"cannot write CSV to {path}: {exc}") from exc


def parse_csv(path):
    """Read back a sweep CSV into SweepRow objects."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise AoiqError(f"unexpected CSV header in {path}")
        rows = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            values = []
            for name, cell in zip(CSV_COLUMNS, cells):
                if cell == "":
                    values.append(None)
                elif name in ("runs", "seed"):
                    values.append(int(cell))
                else:
                    values.append(float(cell))
            rows.append(SweepRow(*values))
    return rows


def point_seed(base_seed: int, point_index: int) -> int:
    """Per-sweep-point base seed: SeedSequence([base_seed, point_index])."""
    return int(SeedSequence([base_seed, point_index]).generate_state(1)[0])


def _paper_aaoi_or_none(scn, source) -> Optional[float]:
    if scn.adversary_rate <= 0:
        return None
    try:
        return analytic.average_aoi(scn, source, mode="paper")
    except (ConvergenceError, ScenarioError):
        return None


def evaluate_point(scn, sim: config.SimSettings, seed: int, source=None) -> SweepRow:
    """One sweep row: analytics, bounds, and a simulation estimate."""
    i = analytic._resolve_source(scn, source)
    est = simulator.run_batch(
        scn,
        runs=sim.runs,
        deliveries=sim.deliveries_per_run,
        warmup_fraction=sim.warmup_fraction,
        base_seed=seed,
        confidence=sim.confidence,
    )
    src = est.sources[i]
    return SweepRow(
        sweep_value=0.0,
        analytic_paper=_paper_aaoi_or_none(scn, i),
        analytic_exact=analytic.average_aoi(scn, i, mode="exact"),
        lb=bounds.lower_bound(scn, i, baseline=True),
        ub=bounds.upper_bound(scn, i),
        sim_mean=src.aaoi,
        sim_ci_low=src.aaoi - src.aaoi_halfwidth,
        sim_ci_high=src.aaoi + src.aaoi_halfwidth,
        runs=sim.runs,
        seed=seed,
    )


def run_sweep(cfg: config.ResolvedConfig, source=None) -> list:
    """Evaluate the configured sweep; row order follows the sweep values."""
    if cfg.sweep is None:
        raise AoiqError("config has no sweep section")
    rows = []
    for k, value in enumerate(cfg.sweep["values"]):
        doc = config.set_parameter(cfg.raw, cfg.sweep["parameter"], value)
        doc.pop("sweep", None)
        point_cfg = config.resolve(doc)
        seed = point_seed(cfg.sim.seed, k)
        row = evaluate_point(point_cfg.scenario, point_cfg.sim, seed, source)
        rows.append(dataclasses.replace(row, sweep_value=value))
    return rows


def write_meta(path: str, cfg_doc: dict, extra: dict | None = None) -> None:
    """Provenance sidecar for a CSV: the resolved config plus seed bookkeeping."""
    meta = {"config": cfg_doc}
    if extra:
        meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _preset_doc(dist: str, lam1: float, n_benign: int, attack_rate: float, beta: float, sim: dict) -> dict:
    return {
        "sources": [{"rate": lam1} for _ in range(n_benign)],
        "adversary": {"rate": attack_rate, "beta": beta if attack_rate > 0 else 1.0},
        "caps": dict(config.CAP_DEFAULTS),
        "service": dict(PRESET_SERVICES[dist]),
        "sim": sim,
    }


def _series_path(out: str, label: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_{label}{ext or '.csv'}"


def preset_fig3(dist: str, out: str, sim_overrides: dict | None = None) -> list:
    """Two-source AAoI sweep over lambda_1, one series per preset attack rate.

    Writes one CSV per attack rate (suffix ``_lam2_<rate>``) plus a
    provenance sidecar; returns the list of CSV paths.
    """
    paths = []
    sim = {**config.SIM_DEFAULTS, **(sim_overrides or {})}
    for lam2 in FIG3_ATTACK_RATES:
        rows = []
        for k, lam1 in enumerate(PRESET_LAMBDA1_GRID):
            doc = _preset_doc(dist, lam1, 1, lam2, FIG3_BETA, sim)
            cfg = config.resolve(doc)
            seed = point_seed(cfg.sim.seed, k)
            row = evaluate_point(cfg.scenario, cfg.sim, seed)
            rows.append(_with_value(row, lam1))
        path = _series_path(out, f"lam2_{_label(lam2)}")
        emit_csv(rows, path)
        doc = _preset_doc(dist, PRESET_LAMBDA1_GRID[0], 1, lam2, FIG3_BETA, sim)
        write_meta(path + ".meta.json", config.resolve(doc).describe(), {"sweep": {"parameter": "sources.0.rate", "values": list(PRESET_LAMBDA1_GRID)}})
        paths.append(path)
    return paths


def preset_fig4(dist: str, n: int, out: str, sim_overrides: dict | None = None) -> list:
    """Bounds-vs-numeric sweep over lambda_1 with N total sources.

    All N-1 benign sources share the swept rate; the numeric series fixes
    the attack at rate 1 with slowdown 1.5.
    """
    if n not in (2, 4):
        raise AoiqError("preset fig4 supports n in {2, 4}")
    sim = {**config.SIM_DEFAULTS, **(sim_overrides or {})}
    rows = []
    for k, lam1 in enumerate(PRESET_LAMBDA1_GRID):
        doc = _preset_doc(dist, lam1, n - 1, FIG4_ATTACK_RATE, FIG4_BETA, sim)
        cfg = config.resolve(doc)
        seed = point_seed(cfg.sim.seed, k)
        row = evaluate_point(cfg.scenario, cfg.sim, seed, source=0)
        rows.append(_with_value(row, lam1))
    emit_csv(rows, out)
    doc = _preset_doc(dist, PRESET_LAMBDA1_GRID[0], n - 1, FIG4_ATTACK_RATE, FIG4_BETA, sim)
    write_meta(out + ".meta.json", config.resolve(doc).describe(), {"sweep": {"parameter": "sources.0.rate", "values": list(PRESET_LAMBDA1_GRID)}})
    return [out]


def _with_value(row: SweepRow, value: float) -> SweepRow:
    return dataclasses.replace(row, sweep_value=value)


def _label(x: float) -> str:
    return format(x, "g").replace(".", "p")


def validation_report(cfg: config.ResolvedConfig, source=None) -> dict:
    """Compare paper mode, exact mode, bounds, and simulation for one scenario.

    The report is machine readable; ``ok`` is false when an exact-mode value
    falls outside the simulator confidence interval at the configured level.
    """
    scn = cfg.scenario
    i = analytic._resolve_source(scn, source)
    report: dict = {"config": cfg.describe(), "source": i}

    exact = analytic.age_moments(scn, i, mode="exact")
    report["exact"] = {
        "aaoi": exact.average_aoi,
        "paoi": exact.average_paoi,
        "mean_system_time": exact.mean_system_time,
        "mean_interdeparture": exact.mean_interdeparture,
        "second_interdeparture": exact.second_interdeparture,
    }
    if scn.adversary_rate > 0:
        paper = analytic.age_moments(scn, i, mode="paper")
        report["paper"] = {
            "aaoi": paper.average_aoi,
            "paoi": paper.average_paoi,
            "mean_system_time": paper.mean_system_time,
            "mean_interdeparture": paper.mean_interdeparture,
        }
        p_d = analytic.delivery_probability(scn)
        report["cycle_mgf_literal_at_zero"] = {
            "value": analytic.interdeparture_mgf_paper(scn, 0.0, i),
            "expected_p_d_times_1_minus_p_d": p_d * (1.0 - p_d),
        }
        report["paper_vs_exact_gap"] = {
            "aaoi": paper.average_aoi - exact.average_aoi,
            "paoi": paper.average_paoi - exact.average_paoi,
        }
    else:
        report["paper"] = None

    pair = bounds.bound_pair(scn, i)
    report["bounds"] = {
        "lower_baseline": bounds.lower_bound(scn, i, baseline=True),
        "lower": bounds.lower_bound(scn, i, baseline=False),
        "upper": pair.upper,
        "upper_at_caps": pair.upper_conservative,
    }

    est = simulator.run_batch(
        scn,
        runs=cfg.sim.runs,
        deliveries=cfg.sim.deliveries_per_run,
        warmup_fraction=cfg.sim.warmup_fraction,
        base_seed=cfg.sim.seed,
        confidence=cfg.sim.confidence,
    )
    src = est.sources[i]
    report["simulation"] = est.to_dict()

    checks = []
    for name, value, lo, hi in (
        ("exact_aaoi_in_ci", exact.average_aoi, src.aaoi - src.aaoi_halfwidth, src.aaoi + src.aaoi_halfwidth),
        ("exact_paoi_in_ci", exact.average_paoi, src.paoi - src.paoi_halfwidth, src.paoi + src.paoi_halfwidth),
    ):
        checks.append({"name": name, "value": value, "ci": [lo, hi], "pass": lo <= value <= hi})
    report["checks"] = checks
    report["ok"] = all(c["pass"] for c in checks)
    return report
