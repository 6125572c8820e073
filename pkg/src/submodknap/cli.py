"""Command line entry point: ``run``, ``aggregate`` and ``gen`` subcommands."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import ConfigError, ExperimentConfig, aggregate, read_csv, run_experiment, \
    save_run, write_aggregate
from .instances import GenSpec, gen_er_graph, write_costs_csv, write_edge_list

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    cfg.validate()
    out = args.out or cfg.output or "results.csv"
    cfg.output = out
    rows = run_experiment(cfg)
    save_run(cfg, rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    rows = read_csv(args.raw)
    raw = Path(args.raw)
    out = args.out or str(raw.with_name(raw.stem + "_agg.csv"))
    write_aggregate(aggregate(rows), out)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    text = args.spec
    try:
        data = json.loads(Path(text).read_text(encoding="utf-8")) if Path(text).exists() \
            else json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad generator spec: {exc}") from None
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        spec = GenSpec(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad generator spec: {exc}") from None
    graph, costs = gen_er_graph(spec)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, out / "graph.txt")
    write_costs_csv(costs, out / "costs.csv")
    print(f"wrote {out / 'graph.txt'} ({graph.m} edges) and {out / 'costs.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="submodknap",
                                 description="Knapsack-constrained submodular maximization benchmarks")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config, write raw CSV")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--threads", type=int)
    run.set_defaults(func=_cmd_run)

    agg = sub.add_parser("aggregate", help="mean/std per setting from a raw CSV")
    agg.add_argument("raw")
    agg.add_argument("--out")
    agg.set_defaults(func=_cmd_aggregate)

    gen = sub.add_parser("gen", help="write an Erdos-Renyi instance (edge list + costs)")
    gen.add_argument("spec", help="JSON file or inline JSON with GenSpec fields")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", help="output directory")
    gen.set_defaults(func=_cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
