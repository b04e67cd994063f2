"""Command-line entry point.

Subcommands: analytic, simulate, bounds, sweep, preset (fig3/fig4),
validate.  Exit codes: 0 success, 1 validation failure (a confidence
interval excluded the analytic value), 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import analytic, bounds, config, simulator, sweep
from .errors import AoiqError, ConfigError, ScenarioError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _age_moments_dict(scn, source, mode):
    m = analytic.age_moments(scn, source, mode=mode)
    return dataclasses.asdict(m)


def cmd_analytic(args) -> int:
    cfg = config.load(args.config)
    modes = ("paper", "exact") if args.mode == "both" else (args.mode,)
    out = {"config": cfg.describe()}
    for mode in modes:
        out[mode] = _age_moments_dict(cfg.scenario, args.source, mode)
    print(_dump(out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = config.load(args.config)
    if args.trace:
        simulator.run_single(
            cfg.scenario,
            deliveries=cfg.sim.deliveries_per_run,
            warmup_fraction=cfg.sim.warmup_fraction,
            seed=simulator.derive_run_seeds(cfg.sim.seed, 1)[0],
            trace_path=args.trace,
            max_trace_events=args.max_trace_events,
        )
    est = simulator.run_batch(
        cfg.scenario,
        runs=cfg.sim.runs,
        deliveries=cfg.sim.deliveries_per_run,
        warmup_fraction=cfg.sim.warmup_fraction,
        base_seed=cfg.sim.seed,
        confidence=cfg.sim.confidence,
    )
    print(_dump({"config": cfg.describe(), "estimate": est.to_dict()}))
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = config.load(args.config)
    pair = bounds.bound_pair(cfg.scenario, args.source)
    out = {
        "config": cfg.describe(),
        "source": pair.source,
        "lower_baseline": pair.lower,
        "lower": bounds.lower_bound(cfg.scenario, args.source, baseline=False),
        "upper": pair.upper,
        "upper_at_caps": pair.upper_conservative,
        "worst_case": pair.worst_case,
    }
    print(_dump(out))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = config.load(args.config)
    rows = sweep.run_sweep(cfg)
    sweep.emit_csv(rows, args.out)
    sweep.write_meta(args.out + ".meta.json", cfg.describe())
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_preset(args) -> int:
    overrides = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.deliveries is not None:
        overrides["deliveries_per_run"] = args.deliveries
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.figure == "fig3":
        paths = sweep.preset_fig3(args.dist, args.out, overrides)
    else:
        paths = sweep.preset_fig4(args.dist, args.n, args.out, overrides)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = config.load(args.config)
    report = sweep.validation_report(cfg)
    text = _dump(report)
    with open(args.out, "w") as fh:
        fh.write(text + "\n")
    print(text)
    return EXIT_OK if report["ok"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoiq",
        description="AoI/PAoI analysis and simulation of adversarial M/G/1/1 status updates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form age moments as JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--source", type=int, default=None)
    p.add_argument("--mode", choices=("paper", "exact", "both"), default="both")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo estimate as JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", default=None, help="write a per-event CSV trace of run 0")
    p.add_argument("--max-trace-events", type=int, default=100_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="AAoI lower/upper bounds as JSON (both cap readings)")
    p.add_argument("--config", required=True)
    p.add_argument("--source", type=int, default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="evaluate the configured sweep into a CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "preset",
        help="canned sweeps; grids documented here",
        description=(
            "fig3: two-source AAoI vs lambda_1 over the grid 0.2,0.4,...,3.0 "
            "(15 points), one CSV per attack rate in {0, 0.75, 1.5}, slowdown 1.5. "
            "fig4: bounds + numeric series (attack rate 1, slowdown 1.5) vs lambda_1 "
            "on the same grid; with --n 4 the three benign sources share the swept rate."
        ),
    )
    p.add_argument("figure", choices=("fig3", "fig4"))
    p.add_argument("--dist", choices=tuple(sweep.PRESET_SERVICES), required=True)
    p.add_argument("--n", type=int, choices=(2, 4), default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--deliveries", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("validate", help="analytic-vs-simulation validation report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AoiqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
