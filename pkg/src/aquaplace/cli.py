"""Command-line interface: simulate, optimize, exhaustive, analyze.

All outputs are deterministic CSV/JSON byte streams so runs can be diffed.
Exit codes: 0 ok, 1 I/O or runtime failure, 2 validation/config failure,
3 enumeration cap exceeded.  Set AQUAPLACE_LOG to control log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__, engine, events, indicators, oracle, placement
from .errors import CapExceededError, ParseError, ValidationError
from .events import TimeGrid

log = logging.getLogger("aquaplace")

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3


def _fmt(x: float) -> str:
    return repr(float(x))


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta-t", type=float, default=3600.0,
                        help="time step in seconds (default 3600)")
    parser.add_argument("--k", type=int, default=24,
                        help="number of time steps (default 24)")


def _grid(args: argparse.Namespace) -> TimeGrid:
    return TimeGrid(delta_t=args.delta_t, steps=args.k)


def cmd_simulate(args: argparse.Namespace) -> int:
    from .network import parse_network

    if args.decay < 0:
        raise ValidationError("--decay must be non-negative")
    net = parse_network(args.network)
    tensor = events.simulate_plug_flow(net, _grid(args), c0=args.c0, decay=args.decay)
    events.save_event_tensor(tensor, args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def _write_placements_csv(path: str, rows: list[tuple[str, float, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("bitstring", "f1_s", "f2_s"))
        for bits, f1, f2 in rows:
            writer.writerow((bits, _fmt(f1), _fmt(f2)))


def cmd_optimize(args: argparse.Namespace) -> int:
    from .network import parse_network

    started = time.monotonic()
    net = parse_network(args.network)
    grid = _grid(args)
    tensor = events.load_event_tensor(args.tensor, net, grid,
                                      weights_path=args.weights)
    config = engine.load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    result = engine.run(net, tensor, config, workers=args.threads)

    os.makedirs(args.out, exist_ok=True)
    pareto_path = os.path.join(args.out, "pareto.csv")
    trace_path = os.path.join(args.out, "indicators.csv")

    evaluated = {}
    for genome in result.pareto_set:
        point = placement.objectives(tensor, genome, config.threshold,
                                     config.penalty, config.include_t0)
        evaluated[placement.placement_to_string(genome)] = point
    rows = sorted(
        ((bits, p.f1, p.f2) for bits, p in evaluated.items()),
        key=lambda r: (r[1], r[2], r[0]),
    )
    _write_placements_csv(pareto_path, rows)
    indicators.write_trace_csv(result.trace, trace_path)

    manifest = {
        "tool_version": __version__,
        "config": engine.config_to_dict(config),
        "grid": {"delta_t": grid.delta_t, "steps": grid.steps},
        "inputs": {
            args.network: _sha256(args.network),
            args.tensor: _sha256(args.tensor),
            args.config: _sha256(args.config),
        },
        "outputs": {
            "pareto.csv": _sha256(pareto_path),
            "indicators.csv": _sha256(trace_path),
        },
        "termination_reason": result.termination_reason,
        "duration_s": time.monotonic() - started,
    }
    # manifest written last: its presence marks a completed run
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    log.info("terminated by %s after %d generations",
             result.termination_reason, len(result.trace))
    print(f"termination: {result.termination_reason}; "
          f"frontier points: {len(result.pareto_frontier)}; "
          f"generations: {len(result.trace)}")
    return EXIT_OK


def cmd_exhaustive(args: argparse.Namespace) -> int:
    from .network import parse_network

    net = parse_network(args.network)
    grid = _grid(args)
    tensor = events.load_event_tensor(args.tensor, net, grid,
                                      weights_path=args.weights)
    result = oracle.exhaustive_pareto(
        tensor, tau=args.tau, budget=args.p, cap=args.cap
    )

    os.makedirs(args.out, exist_ok=True)
    steps = placement.detection_step_table(tensor.values, args.tau)
    penalty_s = placement.PenaltyPolicy().seconds_for(grid)
    rows = []
    for genome in result.pareto_set:
        event_steps = steps[np.flatnonzero(genome)].min(axis=0)
        times = placement.detection_times_s(event_steps, grid.delta_t, penalty_s)
        point = placement.objectives_from_times(times, tensor.weights)
        rows.append((placement.placement_to_string(genome), point.f1, point.f2))
    rows.sort(key=lambda r: (r[1], r[2], r[0]))
    _write_placements_csv(os.path.join(args.out, "true_pareto.csv"), rows)

    summary = {
        "total_feasible": result.total_feasible,
        "pareto_set_size": len(result.pareto_set),
        "pareto_frontier_size": len(result.pareto_frontier),
        "hypervolume": result.hypervolume,
        "reference_point": list(result.reference_point),
    }
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"feasible placements: {result.total_feasible}")
    print(f"pareto set size: {len(result.pareto_set)}")
    print(f"pareto frontier size: {len(result.pareto_frontier)}")
    print(f"hypervolume: {result.hypervolume!r}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    from .network import parse_network

    net = parse_network(args.network)
    tensor = events.load_event_tensor(args.tensor, net, _grid(args),
                                      weights_path=args.weights)
    result = oracle.pairwise_analysis(
        tensor, tau=args.tau, budget=args.p, bins=args.bins, cap=args.cap
    )

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "pairwise.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("hamming", "frobenius", "df1", "df2"))
        for h, f, d1, d2 in zip(result.hamming, result.frobenius,
                                result.df1, result.df2):
            writer.writerow((int(h), _fmt(f), _fmt(d1), _fmt(d2)))

    def cell(x: float | None) -> str:
        return "" if x is None else _fmt(x)

    with open(os.path.join(args.out, "summary.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("bin_kind", "bin_key", "count",
                         "frobenius_mean", "frobenius_std",
                         "df1_mean", "df1_std", "df2_mean", "df2_std"))
        for row in result.summary:
            writer.writerow((row.bin_kind, row.bin_key, row.count,
                             cell(row.frobenius_mean), cell(row.frobenius_std),
                             cell(row.df1_mean), cell(row.df1_std),
                             cell(row.df2_mean), cell(row.df2_std)))
    print(f"placements: {result.n_placements}; pairs: {result.n_pairs}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aquaplace",
        description="Risk-aware bi-objective sensor placement on networks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write a plug-flow event tensor CSV")
    p_sim.add_argument("--network", required=True)
    p_sim.add_argument("--out", required=True, help="tensor CSV path")
    p_sim.add_argument("--c0", type=float, default=100.0,
                       help="injected concentration (default 100)")
    p_sim.add_argument("--decay", type=float, default=0.0,
                       help="exponential decay rate per second (default 0)")
    _add_grid_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_opt = sub.add_parser("optimize", help="run the NSGA-II engine")
    p_opt.add_argument("--network", required=True)
    p_opt.add_argument("--tensor", required=True)
    p_opt.add_argument("--config", required=True, help="engine config JSON")
    p_opt.add_argument("--out", required=True, help="output directory")
    p_opt.add_argument("--weights", default=None, help="event weights CSV")
    p_opt.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_opt.add_argument("--threads", type=int, default=1,
                       help="evaluation workers (outputs are unaffected)")
    _add_grid_flags(p_opt)
    p_opt.set_defaults(func=cmd_optimize)

    p_exh = sub.add_parser("exhaustive", help="exact Pareto set via enumeration")
    p_exh.add_argument("--network", required=True)
    p_exh.add_argument("--tensor", required=True)
    p_exh.add_argument("--out", required=True, help="output directory")
    p_exh.add_argument("--weights", default=None)
    p_exh.add_argument("--tau", type=float, default=50.0,
                       help="detection threshold (default 50)")
    p_exh.add_argument("--p", type=int, required=True, help="sensor budget")
    p_exh.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    _add_grid_flags(p_exh)
    p_exh.set_defaults(func=cmd_exhaustive)

    p_ana = sub.add_parser("analyze", help="pairwise distance/objective analysis")
    p_ana.add_argument("--network", required=True)
    p_ana.add_argument("--tensor", required=True)
    p_ana.add_argument("--out", required=True, help="output directory")
    p_ana.add_argument("--weights", default=None)
    p_ana.add_argument("--tau", type=float, default=50.0)
    p_ana.add_argument("--p", type=int, required=True, help="sensor budget")
    p_ana.add_argument("--bins", type=int, default=8,
                       help="frobenius bins in the summary (default 8)")
    p_ana.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    _add_grid_flags(p_ana)
    p_ana.set_defaults(func=cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("AQUAPLACE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapExceededError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        log.exception("unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
