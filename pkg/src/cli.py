#!/usr/bin/env python3
"""
Command-line front end: grow, ensemble, predict, compare and validate.

Exit status is 0 on success, 1 for model, validation and runtime errors and
2 for bad flags. Diagnostics go to stderr; payloads go to --out or stdout.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from analytics import (
    degree_law_table, model_params, order_distribution_exact, order_law_table, rate_limits,
    size_distribution, size_distribution_paper,
)
from errors import BadParams, PicgError
from export_data import (
    read_distribution_csv, write_comparison_csv, write_edgelist_csv, write_ensemble_csv, write_pajek,
    write_predictor_table, write_rates_csv, write_trace_csv,
)
from model_dsl import parse_model_file, preset_kind, resolve_model
from rules_engine import StopCondition, grow
from sim_harness import MONITOR_PERIOD, compare_distributions, compare_with_predictors, run_ensemble

logger = logging.getLogger(__name__)

SEED_VARIABLE = "PICG_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="picg", description="Probabilistic inductive classes of graphs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    model_help = "model file (.picg) or preset:name[:p1[:p2]]"

    grow_cmd = commands.add_parser("grow", help="grow one graph")
    grow_cmd.add_argument("--model", required=True, help=model_help)
    _add_stop_arguments(grow_cmd)
    grow_cmd.add_argument("--seed", type=int, help=f"random seed (falls back to ${SEED_VARIABLE})")
    grow_cmd.add_argument("--out", help="output file; stdout if not given")
    grow_cmd.add_argument("--format", choices=["edgelist", "pajek"], default="edgelist")
    grow_cmd.add_argument("--trace", help="write the step trace as CSV to this file")

    ensemble_cmd = commands.add_parser("ensemble", help="grow many graphs and summarize degree densities")
    ensemble_cmd.add_argument("--model", required=True, help=model_help)
    ensemble_cmd.add_argument("--runs", type=int, required=True)
    _add_stop_arguments(ensemble_cmd)
    ensemble_cmd.add_argument("--seed", type=int, help=f"master seed (falls back to ${SEED_VARIABLE})")
    ensemble_cmd.add_argument("--report", help="ensemble CSV; stdout if not given")
    ensemble_cmd.add_argument("--compare", help="also write a comparison with the predicted degree laws")
    ensemble_cmd.add_argument("--check-invariants", action="store_true")
    ensemble_cmd.add_argument("--check-every", type=int, default=MONITOR_PERIOD)
    ensemble_cmd.add_argument("--jobs", type=int, default=1)

    predict_cmd = commands.add_parser("predict", help="tabulate predicted distributions")
    predict_cmd.add_argument("--model", required=True, help=model_help)
    predict_cmd.add_argument("--what", choices=["degree", "order", "size", "rates"], required=True)
    predict_cmd.add_argument("--t", type=int, default=0, help="step count for order and size")
    predict_cmd.add_argument("--dmax", type=int, help="largest degree; chosen from the tail bound if not given")
    predict_cmd.add_argument("--out", help="output file; stdout if not given")

    compare_cmd = commands.add_parser("compare", help="compare two distribution CSVs")
    compare_cmd.add_argument("--empirical", required=True)
    compare_cmd.add_argument("--predicted", required=True)
    compare_cmd.add_argument("--out", help="output file; stdout if not given")

    validate_cmd = commands.add_parser("validate", help="parse and check a model file")
    validate_cmd.add_argument("--model", required=True)
    return parser


def _add_stop_arguments(command: argparse.ArgumentParser) -> None:
    stop = command.add_mutually_exclusive_group(required=True)
    stop.add_argument("--steps", type=int, help="number of steps")
    stop.add_argument("--vertices", type=int, help="stop once the graph has this many vertices")


def _stop(args: argparse.Namespace) -> StopCondition:
    if args.steps is not None:
        return StopCondition.after_steps(args.steps)
    return StopCondition.at_vertices(args.vertices)


def _resolve_seed(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    if args.seed is not None:
        seed = args.seed
    else:
        value = os.environ.get(SEED_VARIABLE)
        if value is None:
            parser.error(f"--seed is required (or set ${SEED_VARIABLE})")
        try:
            seed = int(value)
        except ValueError:
            parser.error(f"${SEED_VARIABLE} must be an integer, got {value!r}")
    if seed < 0:
        parser.error(f"seed must be >= 0, got {seed}")
    return seed


def _target(path: Optional[str]):
    return path if path and path != "-" else sys.stdout


def cmd_grow(args: argparse.Namespace, seed: int) -> int:
    model = resolve_model(args.model)
    g, trace = grow(model, _stop(args), seed)
    if args.format == "pajek":
        write_pajek(g, _target(args.out))
    else:
        write_edgelist_csv(g, _target(args.out))
    if args.trace:
        write_trace_csv(trace, args.trace)
    logger.info("grew %s: n=%d m=%d after %d steps", model.name, g.n, g.m, len(trace.steps))
    return 0


def cmd_ensemble(args: argparse.Namespace, seed: int) -> int:
    model = resolve_model(args.model)
    stats = run_ensemble(model, args.runs, _stop(args), seed, jobs=max(1, args.jobs),
                         check_invariants=args.check_invariants, check_every=args.check_every)
    write_ensemble_csv(stats, _target(args.report))
    if args.compare:
        kind, params = model_params(model)
        write_comparison_csv(compare_with_predictors(stats, kind, params), args.compare)
    if args.report and args.report != "-":
        print_ensemble_summary(stats)
    return 0


def print_ensemble_summary(stats) -> None:
    print("=" * 80)
    print(f"ENSEMBLE: {stats.model_name}  ({stats.runs} runs, {stats.stop.describe()}, seed {stats.master_seed})")
    print("=" * 80)
    print(f"{'Mean steps:':<24} {stats.mean_steps():>14,.1f}")
    print(f"{'Mean vertices:':<24} {stats.mean_order():>14,.1f}")
    print(f"{'Mean edges:':<24} {stats.mean_size():>14,.1f}")
    print(f"{'Mean degree (2m/n):':<24} {stats.empirical_mean_degree():>14.4f}")
    print()


def cmd_predict(args: argparse.Namespace) -> int:
    model = resolve_model(args.model)
    if args.t < 0:
        raise BadParams(f"--t must be >= 0, got {args.t}")
    recognized = preset_kind(model)

    if args.what == "rates":
        rates = rate_limits(model)
        write_rates_csv(_target(args.out), {"dn": float(rates.dn), "dm": float(rates.dm),
                                            "mean_degree": rates.mean_degree})
        return 0

    if args.what == "degree":
        kind, params = model_params(model)
        columns = {
            "paper": degree_law_table(kind, params, "paper", args.dmax),
            "corrected": degree_law_table(kind, params, "corrected", args.dmax),
            "oracle": degree_law_table(kind, params, "series", args.dmax),
        }
        write_predictor_table(_target(args.out), "d", columns)
        return 0

    if args.what == "order":
        columns: Dict = {"paper": None, "corrected": None}
        # the printed laws exist only for the preset classes
        if recognized is not None:
            kind, params = model_params(model)
            columns["paper"] = order_law_table(kind, args.t, params, "printed")
            columns["corrected"] = order_law_table(kind, args.t, params, "multinomial")
        columns["oracle"] = order_distribution_exact(model, args.t)
        write_predictor_table(_target(args.out), "n", columns)
        return 0

    paper = None
    if recognized is not None:
        kind, params = recognized
        # the PA preset carries its basis edge count as its one parameter
        m_pa = int(params[0]) if kind == "pa" else 1
        paper = size_distribution_paper(kind, args.t, m_pa)
    columns = {"paper": paper,
               "corrected": None,
               "oracle": size_distribution(model, args.t)}
    write_predictor_table(_target(args.out), "m", columns)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    empirical = read_distribution_csv(args.empirical)
    predicted = read_distribution_csv(args.predicted)
    metrics = compare_distributions(empirical, predicted, predictor=Path(args.predicted).stem)
    write_comparison_csv([metrics], _target(args.out))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    model = parse_model_file(args.model)
    print(f"ok: {model.name} ({len(model.basis)} basis graph(s), {len(model.rules)} rule(s))")
    return 0


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    # argparse exits with 2 on bad flags
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)

    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("grow", "ensemble"):
            seed = _resolve_seed(parser, args)
            if args.command == "grow":
                return cmd_grow(args, seed)
            return cmd_ensemble(args, seed)
        if args.command == "predict":
            return cmd_predict(args)
        if args.command == "compare":
            return cmd_compare(args)
        return cmd_validate(args)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    except PicgError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
