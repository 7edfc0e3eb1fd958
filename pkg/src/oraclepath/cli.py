"""Command line interface: gen, run, sweep, fit, plot.

Exit code 0 on success, 2 on usage or configuration errors (malformed
configs report the offending field).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis, experiments, worlds


def _parse_grid(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise ValueError(f"n_grid: not a comma-separated integer list: {text!r}") from exc


def _cmd_gen(args) -> int:
    seed = args.seed
    if args.family == "er-prior":
        pair = worlds.gen_er_world(worlds.ErPriorParams(n=args.n, p=args.p, eta=args.eta, seed=seed))
    elif args.family == "double-star":
        pair = worlds.gen_double_star(worlds.DoubleStarParams(n=args.n, seed=seed))
    elif args.family == "partitioned":
        sizes = _parse_grid(args.groups)
        pair = worlds.gen_partitioned(worlds.PartitionParams(
            group_sizes=sizes, p=args.p, eta=args.eta, seed=seed))
    elif args.family == "noisy-prior":
        pair = worlds.gen_noisy_prior(worlds.NoisyPriorParams(
            n=args.n, p=args.p, eta=args.eta, r=args.r, seed=seed))
    elif args.family == "complete-empty":
        pair = worlds.gen_complete_empty(args.n)
    else:
        raise ValueError(f"family: unknown family {args.family!r}")
    worlds.save_world(pair, args.out)
    print(f"wrote world ({pair.family['family']}, n={pair.n}) to {args.out}")
    return 0


def _load_config(args, n_grid: list[int]) -> experiments.ExperimentConfig:
    merged = {
        "experiment": args.experiment,
        "n_grid": n_grid,
        "trials": args.trials,
        "seed": args.seed,
        "params": {},
        "budget": args.budget,
        "timing": args.timing,
        "workers": args.workers or experiments.default_workers(),
    }
    if args.config:
        with open(args.config) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"config: not valid JSON ({exc})") from exc
        if not isinstance(loaded, dict):
            raise ValueError("config: top level must be an object")
        allowed = set(merged) | {"params"}
        for key, value in loaded.items():
            if key not in allowed:
                raise ValueError(f"config: unknown field {key!r}")
            merged[key] = value
        # flags override file values when explicitly given
        if args.experiment is not None:
            merged["experiment"] = args.experiment
        if n_grid:
            merged["n_grid"] = n_grid
    if merged["experiment"] is None:
        raise ValueError("experiment: required (flag or config)")
    if not merged["n_grid"]:
        raise ValueError("n_grid: required (use --n or --n-grid)")
    if merged["seed"] is None:
        raise ValueError("seed: required for reproducible runs")
    if args.param:
        for spec in args.param:
            if "=" not in spec:
                raise ValueError(f"param: expected key=value, got {spec!r}")
            key, value = spec.split("=", 1)
            try:
                merged["params"][key] = json.loads(value)
            except json.JSONDecodeError:
                merged["params"][key] = value
    cfg = experiments.ExperimentConfig(
        experiment=merged["experiment"], n_grid=[int(x) for x in merged["n_grid"]],
        trials=int(merged["trials"]), seed=int(merged["seed"]),
        params=dict(merged["params"]), budget=merged["budget"],
        timing=bool(merged["timing"]), workers=int(merged["workers"]))
    cfg.validate()
    return cfg


def _run_and_persist(cfg: experiments.ExperimentConfig, out_dir: str, make_plot: bool) -> int:
    os.makedirs(out_dir, exist_ok=True)
    result, records = experiments.run_experiment(cfg)
    csv_path = os.path.join(out_dir, f"{cfg.experiment}.csv")
    json_path = os.path.join(out_dir, f"{cfg.experiment}.sweep.json")
    experiments.write_records_csv(records, csv_path)
    experiments.write_sweep_json(result, json_path)
    print(f"wrote {csv_path} and {json_path}")
    if result.grounding_violations:
        print(f"warning: {result.grounding_violations} grounding violations", file=sys.stderr)
    if make_plot:
        from . import plotting
        svg_path = os.path.join(out_dir, f"{cfg.experiment}.svg")
        plotting.plot_sweep(records, svg_path)
        print(f"wrote {svg_path}")
    return 0


def _cmd_run(args) -> int:
    grid = [args.n] if args.n is not None else []
    cfg = _load_config(args, grid)
    return _run_and_persist(cfg, args.out, args.plot)


def _cmd_sweep(args) -> int:
    grid = _parse_grid(args.n_grid) if args.n_grid else []
    cfg = _load_config(args, grid)
    return _run_and_persist(cfg, args.out, args.plot)


def _cmd_fit(args) -> int:
    records = experiments.read_records_csv(args.csv)
    if not records:
        raise ValueError("csv: no records")
    metric = args.metric or experiments.METRIC_COLUMN[records[0].experiment]
    grid = sorted({r.n for r in records})
    points = []
    for n in grid:
        vals = [getattr(r, metric) for r in records if r.n == n]
        points.append((n, sum(vals) / len(vals)))
    fit = analysis.fit_scaling(points)
    payload = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared}
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_plot(args) -> int:
    from . import plotting
    records = experiments.read_records_csv(args.csv)
    if not records:
        raise ValueError("csv: no records")
    plotting.plot_sweep(records, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oraclepath",
        description="Oracle-query experiments on partially known graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a world-pair directory")
    gen.add_argument("--family", required=True,
                     choices=["er-prior", "double-star", "partitioned",
                              "noisy-prior", "complete-empty"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, default=0.1)
    gen.add_argument("--eta", type=float, default=0.5)
    gen.add_argument("--r", type=float, default=0.8)
    gen.add_argument("--groups", type=str, default="",
                     help="comma-separated group sizes (partitioned family)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    def add_run_flags(p, grid_flag: bool):
        p.add_argument("--experiment", choices=experiments.EXPERIMENT_NAMES, default=None)
        if grid_flag:
            p.add_argument("--n-grid", type=str, default="",
                           help="comma-separated strictly increasing sizes")
        else:
            p.add_argument("--n", type=int, default=None)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--param", action="append", default=[],
                       help="experiment parameter override, key=value (repeatable)")
        p.add_argument("--out", type=str, default=".")
        p.add_argument("--plot", action="store_true", help="also render an SVG figure")
        p.add_argument("--timing", action="store_true",
                       help="record wall times (breaks byte-identical reruns)")
        p.add_argument("--workers", type=int, default=None)

    run = sub.add_parser("run", help="run one experiment at a single size")
    add_run_flags(run, grid_flag=False)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run one experiment over a size grid")
    add_run_flags(sweep, grid_flag=True)
    sweep.set_defaults(func=_cmd_sweep)

    fit = sub.add_parser("fit", help="fit a log-log scaling exponent to a sweep CSV")
    fit.add_argument("--csv", required=True)
    fit.add_argument("--metric", default=None)
    fit.add_argument("--out", default=None)
    fit.set_defaults(func=_cmd_fit)

    plot = sub.add_parser("plot", help="render a sweep CSV to an SVG figure")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=_cmd_plot)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
