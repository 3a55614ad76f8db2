"""Command line front end: single runs, sweeps, baselines, quote curves.

Every subcommand writes deterministic bytes for a given (config, seed), so
outputs can be diffed across machines and reruns. Scale defaults are desk
sized (20 runs x 10,000 steps) to keep turnaround in minutes; --full-scale
switches to the 100 x 40,000 production scale.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

from . import __version__
from .config import SimConfig, apply_overrides, load_config
from .dealer import DEALER_KINDS
from .experiments import (
    AXES,
    SKEW_AXES,
    SweepSpec,
    compare_baselines,
    emit_skew_curve,
    run_sweep,
    write_baselines,
    write_skew_curve,
    write_sweep_result,
)
from .market import run_simulation, write_run_output
from .probsim import VARIANTS, ProbSimParams, wealth_histogram

DESK_STEPS, DESK_RUNS = 10_000, 20
FULL_STEPS, FULL_RUNS = 40_000, 100


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help="INI config file (see README for sections)")
    sub.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append",
                     default=[], dest="overrides",
                     help="override one config value; repeatable")
    sub.add_argument("--seed", help="master seed (any string)")
    sub.add_argument("--steps", type=int,
                     help=f"steps per run (default {DESK_STEPS}, "
                          f"or {FULL_STEPS} with --full-scale)")
    sub.add_argument("--full-scale", action="store_true",
                     help="production scale: "
                          f"{FULL_RUNS} runs x {FULL_STEPS} steps")


def _explicit_scale_keys(args) -> set:
    """Which of steps/runs the config file or --set pairs pin explicitly."""
    explicit = set()
    if args.config:
        parser = configparser.ConfigParser()
        with open(args.config) as fh:
            parser.read_file(fh)
        for key in ("steps", "runs"):
            if parser.has_option("run", key):
                explicit.add(key)
    for pair in args.overrides:
        dotted = pair.split("=", 1)[0].strip()
        if dotted in ("run.steps", "run.runs"):
            explicit.add(dotted.split(".", 1)[1])
    return explicit


def _build_config(args) -> SimConfig:
    """Scale defaults < config file < --set overrides < dedicated flags."""
    cfg = load_config(args.config) if args.config else SimConfig()
    apply_overrides(cfg, args.overrides)
    explicit = _explicit_scale_keys(args)
    if args.steps is not None:
        cfg.steps = args.steps
    elif "steps" not in explicit:
        cfg.steps = FULL_STEPS if args.full_scale else DESK_STEPS
    runs_flag = getattr(args, "runs", None)
    if runs_flag is not None:
        cfg.runs = runs_flag
    elif "runs" not in explicit:
        cfg.runs = FULL_RUNS if args.full_scale else DESK_RUNS
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


# -- subcommands --------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = _build_config(args)
    out = run_simulation(cfg, cfg.seed)
    summary = {
        "seed": out.seed,
        "steps": out.n_steps,
        "final_price": float(out.price[-1]) if out.n_steps else None,
        "dealer_final_wealth": (float(out.dealer_wealth[-1])
                                if out.n_steps else None),
        "dealer_final_inventory": out.final_dealer_q,
        "n_trades": len(out.trades),
        "n_dealer_trades": len(out.dealer_trades),
        "cash_conserved": (out.final_total_cash_ticks
                           == out.initial_total_cash_ticks),
        "stock_conserved": out.final_total_stock == out.initial_total_stock,
    }
    if args.out:
        write_run_output(out, args.out)
        print(f"wrote series.csv, trades.csv, meta.json to {args.out}")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _load_sweep_spec(args, base: SimConfig) -> SweepSpec:
    """Positional is either an axis name or a JSON spec file."""
    target = args.spec
    axis, grid = target, ()
    kinds: tuple | None = None
    runs = None
    master_seed = None
    if axis not in AXES:
        with open(target) as fh:
            raw = json.load(fh)
        unknown = set(raw) - {"axis", "grid", "kinds", "runs", "master_seed"}
        if unknown:
            raise ValueError(f"unknown sweep spec fields: {sorted(unknown)}")
        axis = raw.get("axis")
        grid = tuple(tuple(v) if isinstance(v, list) else v
                     for v in raw.get("grid", ()))
        if "kinds" in raw:
            kinds = tuple(raw["kinds"])
        runs = raw.get("runs")
        master_seed = raw.get("master_seed")
    # dedicated flags win over the spec file
    if args.kinds is not None:
        kinds = tuple(args.kinds.split(","))
    if kinds is None:
        kinds = ("ir",) if axis in SKEW_AXES else ("as", "ir")
    if getattr(args, "runs", None) is not None:
        runs = args.runs
    if args.seed is not None:
        master_seed = args.seed
    return SweepSpec(
        axis=axis, grid=grid, kinds=kinds,
        runs=runs if runs is not None else base.runs,
        base_config=base,
        master_seed=master_seed if master_seed is not None else base.seed)


def cmd_sweep(args) -> int:
    base = _build_config(args)
    spec = _load_sweep_spec(args, base)
    result = run_sweep(spec, workers=args.workers)
    write_sweep_result(result, args.out)
    n_runs = len(spec.grid) * len(spec.kinds) * spec.runs
    print(f"swept {spec.axis}: {len(spec.grid)} points x "
          f"{len(spec.kinds)} kinds x {spec.runs} runs "
          f"({n_runs - len(result.failures)}/{n_runs} ok)")
    for failure in result.failures:
        print(f"  failed point={failure.point} kind={failure.kind} "
              f"run={failure.run}: {failure.error}", file=sys.stderr)
    print(f"wrote sweep.csv, summary.json to {args.out}")
    return 1 if result.failures else 0


def cmd_baselines(args) -> int:
    cfg = _build_config(args)
    comparison = compare_baselines(cfg, cfg.runs)
    headers = ("kind", "total_ret", "wealth_vol", "sharpe",
               "corr_price", "corr_trade", "mean_|q|")
    print(("{:>12}" * len(headers)).format(*headers))
    for row in comparison.rows:
        cells = [row.kind]
        for value in (row.mean_total_return, row.mean_wealth_volatility,
                      row.mean_sharpe, row.mean_wealth_price_corr,
                      row.mean_wealth_trade_corr, row.mean_abs_inventory):
            cells.append("-" if value is None else f"{value:.4g}")
        print(("{:>12}" * len(cells)).format(*cells))
    if args.out:
        write_baselines(comparison, args.out)
        print(f"wrote baselines.csv, baselines.json to {args.out}")
    return 0


def cmd_probsim(args) -> int:
    variants = args.variants.split(",")
    for variant in variants:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r} "
                             f"(choose from {', '.join(VARIANTS)})")
    results = {}
    for variant in variants:
        params = ProbSimParams(variant=variant)
        results[variant] = wealth_histogram(params, n_runs=args.runs,
                                            master_seed=args.seed,
                                            n_bins=args.bins)
    moments = {
        variant: {
            "n_runs": hist["n_runs"],
            "mean": hist["mean"],
            "std": hist["std"],
            "inventory_std": hist["inventory_std"],
            "bin_edges": [float(e) for e in hist["bin_edges"]],
            "bin_counts": [int(c) for c in hist["bin_counts"]],
        }
        for variant, hist in results.items()
    }
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "runs.csv"), "w") as fh:
            fh.write("variant,run,terminal_wealth,terminal_inventory\n")
            for variant in variants:
                hist = results[variant]
                for run in range(hist["n_runs"]):
                    fh.write(f"{variant},{run},{hist['wealth'][run]!r},"
                             f"{hist['inventory'][run]}\n")
        with open(os.path.join(args.out, "moments.json"), "w") as fh:
            json.dump(moments, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote runs.csv, moments.json to {args.out}")
    summary = {variant: {k: moments[variant][k]
                         for k in ("n_runs", "mean", "std", "inventory_std")}
               for variant in variants}
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_skew_curve(args) -> int:
    q_values = range(0, args.q_max + 1, args.q_step)
    rows = emit_skew_curve(args.phi, args.skew_low, args.skew_high, q_values)
    if args.out:
        with open(args.out, "w") as fh:
            write_skew_curve(rows, fh)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        write_skew_curve(rows, sys.stdout)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dealersim",
        description="Agent-based limit-order-book market simulator "
                    "with dealer strategies")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run_p = commands.add_parser(
        "run", help="one market simulation run")
    _add_config_flags(run_p)
    run_p.add_argument("--out", metavar="DIR",
                       help="write series.csv, trades.csv, meta.json here")
    run_p.set_defaults(func=cmd_run)

    sweep_p = commands.add_parser(
        "sweep", help="sweep one parameter axis over a grid")
    sweep_p.add_argument("spec",
                         help="axis name (" + ", ".join(AXES) + ") "
                              "or path to a JSON sweep spec")
    _add_config_flags(sweep_p)
    sweep_p.add_argument("--runs", type=int,
                         help=f"runs per grid point (default {DESK_RUNS})")
    sweep_p.add_argument("--kinds", metavar="KIND[,KIND]",
                         help="dealer kinds to sweep "
                              f"(default as,ir; choices {','.join(DEALER_KINDS)})")
    sweep_p.add_argument("--workers", type=int, default=1,
                         help="parallel worker processes (default 1)")
    sweep_p.add_argument("--out", metavar="DIR", required=True,
                         help="write sweep.csv and summary.json here")
    sweep_p.set_defaults(func=cmd_sweep)

    base_p = commands.add_parser(
        "baselines", help="compare the three dealer strategies on "
                          "common random numbers")
    _add_config_flags(base_p)
    base_p.add_argument("--runs", type=int,
                        help=f"runs per dealer kind (default {DESK_RUNS})")
    base_p.add_argument("--out", metavar="DIR",
                        help="write baselines.csv and baselines.json here")
    base_p.set_defaults(func=cmd_baselines)

    prob_p = commands.add_parser(
        "probsim", help="probabilistic single-dealer simulator "
                        "(no order book)")
    prob_p.add_argument("--runs", type=int, default=1000,
                        help="runs per variant (default 1000)")
    prob_p.add_argument("--seed", default="1", help="master seed")
    prob_p.add_argument("--variants", default=",".join(VARIANTS),
                        help="comma list of variants (default all)")
    prob_p.add_argument("--bins", type=int, default=40,
                        help="wealth histogram bins (default 40)")
    prob_p.add_argument("--out", metavar="DIR",
                        help="write runs.csv and moments.json here")
    prob_p.set_defaults(func=cmd_probsim)

    skew_p = commands.add_parser(
        "skew-curve", help="quote-size decay curve for two skew rates")
    skew_p.add_argument("--phi", type=float, default=5000.0,
                        help="maximum quote size (default 5000)")
    skew_p.add_argument("--skew-low", type=float, default=0.001,
                        help="low decay rate (default 0.001)")
    skew_p.add_argument("--skew-high", type=float, default=0.004,
                        help="high decay rate (default 0.004)")
    skew_p.add_argument("--q-max", type=int, default=5000,
                        help="largest inventory on the curve (default 5000)")
    skew_p.add_argument("--q-step", type=int, default=25,
                        help="inventory grid step (default 25)")
    skew_p.add_argument("--out", metavar="FILE",
                        help="write the CSV here instead of stdout")
    skew_p.set_defaults(func=cmd_skew_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
