"""Command-line front end.

One subcommand per experiment. Without --config each subcommand runs a
standard study at the reference parameters; with --config the YAML
document governs and the flags below still win over it.

    margincascade run          one shock-and-cascade time series
    margincascade sweep        replica-averaged sweep along one axis
    margincascade phase        replica-averaged two-axis grid
    margincascade diversify    sweep over holdings per investor
    margincascade margin-times decline binned by margin-times count

Exit status is 0 on success, nonzero with a one-line diagnostic on
stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys

from .cascade import StateError, run_cascade
from .experiments import (
    SweepSpec,
    detect_critical,
    diversification_sweep,
    margin_times_study,
    phase_diagram,
    run_sweep,
)
from .io import (
    DEFAULT_DIVERSIFY,
    DEFAULT_MARGIN_TIMES,
    RunConfig,
    load_config,
    parse_config,
    summary_json,
    write_grid,
    write_timeseries,
)
from .market import ConfigError, build_market

_DEFAULT_MARKET_OVERRIDES = {
    "diversify": {
        "initial_margin_k": DEFAULT_DIVERSIFY["initial_margin_k"],
        "maintenance_r": DEFAULT_DIVERSIFY["maintenance_r"],
    },
    "margin-times": dict(DEFAULT_MARGIN_TIMES),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="margincascade",
        description="Margin-call cascade simulator on a bipartite investor-share market.",
        epilog="examples:\n"
        "  margincascade run --seed 7 --out run.csv\n"
        "  margincascade sweep --config sweep.yaml --replicas 20 --summary\n"
        "  margincascade phase --out phase_rk.csv\n",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    specs = {
        "run": "simulate one shock and cascade, write the time series",
        "sweep": "sweep one parameter axis with replica averaging",
        "phase": "average tau/p_inf/n_inf over a two-axis grid",
        "diversify": "sweep the number of distinct shares per investor",
        "margin-times": "bin final price declines by margin-times count",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="YAML config file")
        p.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
        p.add_argument("--out", metavar="PATH", help="override the output file path")
        if name != "run":
            p.add_argument("--replicas", type=int, metavar="N",
                           help="override the replica count")
        p.add_argument("--summary", action="store_true",
                       help="print a JSON summary to stdout")
    return parser


def _configure(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config, args.experiment)
    else:
        overrides = _DEFAULT_MARKET_OVERRIDES.get(args.experiment, {})
        cfg = parse_config("", args.experiment)
        if overrides:
            from dataclasses import replace
            cfg.params = replace(cfg.params, **overrides)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed must be in [0, 2**64), got {args.seed}")
        cfg.master_seed = args.seed
        if cfg.experiment == "run":
            from dataclasses import replace
            cfg.params = replace(cfg.params, seed=args.seed)
    if getattr(args, "replicas", None) is not None:
        if args.replicas < 1:
            raise ConfigError(f"--replicas must be >= 1, got {args.replicas}")
        cfg.replicas = args.replicas
    if args.out is not None:
        cfg.output = args.out
    return cfg


def _execute(cfg: RunConfig):
    if cfg.experiment == "run":
        market = build_market(cfg.params)
        result = run_cascade(market, cfg.params)
        rows = write_timeseries(cfg.output, result)
        return result, rows
    if cfg.experiment in ("sweep", "diversify"):
        if cfg.experiment == "sweep":
            result = run_sweep(SweepSpec(
                base=cfg.params, axis=cfg.axis, values=cfg.values,
                replicas=cfg.replicas, master_seed=cfg.master_seed,
            ))
        else:
            result = diversification_sweep(
                cfg.params, cfg.values, replicas=cfg.replicas, master_seed=cfg.master_seed
            )
        rows = write_grid(cfg.output, result)
        critical = detect_critical(result)
        if critical is None:
            print(f"no cascade anywhere on the {result.axis} grid (mean tau = 1 throughout)")
        else:
            tie = " (tied, stable side taken)" if critical.tied else ""
            print(f"peak mean tau {critical.mean_tau:.6g} at "
                  f"{critical.axis} = {critical.value:.6g}{tie}")
        return result, rows
    if cfg.experiment == "phase":
        result = phase_diagram(
            cfg.params, cfg.axis1, cfg.values1, cfg.axis2, cfg.values2,
            replicas=cfg.replicas, master_seed=cfg.master_seed,
        )
        rows = write_grid(cfg.output, result)
        return result, rows
    if cfg.experiment == "margin-times":
        result = margin_times_study(
            cfg.params, replicas=cfg.replicas, master_seed=cfg.master_seed
        )
        rows = write_grid(cfg.output, result)
        return result, rows
    raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _configure(args)
        result, rows = _execute(cfg)
        print(f"wrote {cfg.output} ({rows} rows)")
        if args.summary:
            seed = cfg.params.seed if cfg.experiment == "run" else cfg.master_seed
            print(summary_json(result, experiment=cfg.experiment, seed=seed))
        return 0
    except (ConfigError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
