"""Command-line entry points: ``run``, ``oracle``, ``lp`` and ``mas``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .env import AdsEnvConfig, load_revenue_csv
from .errors import FairGraphError
from .experiment import ExperimentConfig, run_sweep
from .graph import CompatibilityGraph, GraphSchedule, load_graph, mas
from .io import ResultsBundle, load_config, write_results
from .lp import solve_xi
from .oracle import opt_dynamic, opt_weak


def load_instance(path):
    """Instance file: targets, weights, revenue rows (or revenue_csv), optional T and graph."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FairGraphError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    targets = np.asarray(data["targets"], dtype=float)
    if "revenue_csv" in data:
        revenue = load_revenue_csv(path.parent / data["revenue_csv"], targets.size, data.get("T"))
    else:
        revenue = np.asarray(data["revenue"], dtype=float)
    env = AdsEnvConfig(targets, data.get("weights", 0.1), revenue)
    T = int(data.get("T", env.horizon))
    schedule = GraphSchedule.constant(CompatibilityGraph.from_dict(data["graph"])) if "graph" in data else None
    return env, schedule, T


def _label(a):
    return None if a is None else f"a{a + 1}"


def cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    elif args.seed is not None:
        cfg = ExperimentConfig(master_seed=args.seed)
    else:
        raise FairGraphError("run needs --config or --seed")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    records, summary = run_sweep(cfg)
    bundle = ResultsBundle(cfg, records, summary)
    if not args.no_plots:
        from .plots import render_plots

        bundle.plots = render_plots(summary, args.out)
    paths = write_results(bundle, args.out)
    for p in list(paths.values()) + bundle.plots:
        print(p)
    return 0


def cmd_oracle(args) -> int:
    env, schedule, T = load_instance(args.instance)
    weak = opt_weak(env, schedule, T)
    out = {"T": T, "opt_weak": {"value": weak.value, "witness": [_label(a) for a in weak.witness]}}
    if not args.weak_only:
        dyn = opt_dynamic(env, schedule, T)
        out["opt_dynamic"] = {"value": dyn.value, "witness": [_label(a) for a in dyn.witness]}
    print(json.dumps(out, indent=2))
    return 0


def cmd_lp(args) -> int:
    res = solve_xi(load_graph(args.graph))
    print(json.dumps({"xi": res.xi.tolist(), "objective": res.objective}, indent=2))
    return 0


def cmd_mas(args) -> int:
    print(mas(load_graph(args.graph), approximate=args.approximate))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the time-window sweep and write results")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--no-plots", action="store_true", help="skip SVG rendering")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="best constant action and best action sequence of an instance")
    p.add_argument("instance", help="JSON instance file")
    p.add_argument("--weak-only", action="store_true", help="skip the dynamic programme")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("lp", help="exploration distribution of a graph file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("mas", help="maximum acyclic subgraph size of a graph file")
    p.add_argument("graph")
    p.add_argument("--approximate", action="store_true", help="allow the greedy bound above 20 actions")
    p.set_defaults(func=cmd_mas)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FairGraphError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
