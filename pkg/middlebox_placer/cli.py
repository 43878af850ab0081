"""
Command line front end, installed as ``middlebox-placer``. Reports go to stdout (or --out), logs to stderr. On
failure the error is printed as JSON and the process exits with the code of the error: 2 infeasible, 3 parse
error, 4 oracle too large.
"""
import argparse
import functools
import hashlib
import io
import json
import logging
import sys

from middlebox_placer.core import errors
from middlebox_placer.core.classes import (FeasibilitySets, PlacementInstance, build_feasibility,
                                           feasible_total_capacity_check, init)
from middlebox_placer.core.io_wrapper import generator, parser
from middlebox_placer.core.metric import METRICS, compute_apsp
from middlebox_placer.core.utility import timer
from middlebox_placer import bench
from middlebox_placer.placement import greedy, matching, oracle, report, weighted

logger = logging.getLogger(__name__)

VERBOSITY = [logging.WARNING, logging.INFO, logging.DEBUG]


def _read(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except IOError as e:
        raise errors.ParseError("Cannot read {}: {}".format(path, e.strerror), path=path)


def _digest(instance):
    return hashlib.sha256(generator.write_instance(instance).encode("utf-8")).hexdigest()


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as f:
            f.write(text)


def _scenario(args, path):
    return generator.ScenarioConfig(path, p=args.p, stretch=args.stretch or 1.0, seed=args.seed,
                                    replication=args.replication, capacity=args.capacity, metric=args.metric)


def _override(instance, args):
    # flags given on the command line take precedence over the instance document
    metric = args.metric or instance.metric
    distances = instance.distances if metric == instance.metric else compute_apsp(instance.network, metric)
    common = dict(
        network=instance.network,
        distances=distances,
        capacity=instance.capacity if args.capacity is None else args.capacity,
        stretch=instance.stretch if args.stretch is None else args.stretch,
        candidates=instance.candidates,
        constraint=instance.constraint,
        max_length=instance.max_length,
        metric=metric,
    )
    if isinstance(instance, weighted.WeightedInstance):
        return weighted.WeightedInstance(requests=instance.requests, group_predicate=instance.group_predicate,
                                         **common)
    return PlacementInstance(pairs=instance.pairs, **common)


def load_unweighted(args):
    """
    The instance of the solve and incremental commands: an instance JSON, or a random scenario on a topology file.
    """
    if args.instance.lower().endswith(".json"):
        instance = _override(parser.read_instance(_read(args.instance)), args)
    else:
        instance = generator.generate_unweighted_scenario(_scenario(args, args.instance))
    if not isinstance(instance, PlacementInstance):
        raise errors.ParseError("{} holds weighted requests, use solve-weighted".format(args.instance))
    return instance


def load_weighted(args):
    """
    The instance of the solve-weighted command: a weighted instance JSON, or a random scenario on an SNDlib file.
    """
    if args.instance.lower().endswith(".json"):
        instance = _override(parser.read_instance(_read(args.instance)), args)
    else:
        config = _scenario(args, args.instance)
        config.keep_probability = args.keep
        instance = generator.weighted_instance(config, parser.parse_sndlib(_read(args.instance)))
    if not isinstance(instance, weighted.WeightedInstance):
        raise errors.ParseError("{} holds unweighted pairs, use solve".format(args.instance))
    return instance


def _feasibility(instance):
    sets = build_feasibility(instance)
    feasible_total_capacity_check(instance, sets)
    return sets


def _too_large(e):
    return errors.TooLarge("{} Rerun without --oracle or raise --oracle-limit.".format(e.message), **e.details)


def cmd_solve(args):
    """
    Greedy placement of an unweighted instance, writes the report JSON and optionally the greedy trace CSV.
    """
    instance = load_unweighted(args)
    with timer() as elapsed:
        sets = _feasibility(instance)
        trace = greedy.greedy_place(instance, sets, args.threads, args.strategy)
    exact = None
    if args.oracle:
        try:
            exact = oracle.exact_min_middleboxes(instance, sets, args.oracle_limit)
        except errors.TooLarge as e:
            raise _too_large(e)
    run = report.unweighted_report(instance, trace, _digest(instance), elapsed(), "greedy-" + args.strategy, exact)
    if args.trace is not None:
        with open(args.trace, "w", newline="") as f:
            report.write_trace_csv(trace, f)
    _emit(run.to_json(), args.out)
    return run


def cmd_solve_weighted(args):
    """
    Generalized greedy with rounding on a weighted instance, the report lists the relative load of every middlebox.
    """
    instance = load_weighted(args)
    with timer() as elapsed:
        prepared, fractional, rounded = weighted.solve_weighted(instance, args.threads)
    exact = note = None
    if args.oracle:
        kept = [instance.requests[j] for j in prepared.kept]
        try:
            exact = oracle.exact_weighted_min_middleboxes(kept, FeasibilitySets(prepared.entries, len(kept)),
                                                          instance.capacity, args.oracle_limit)
        except errors.TooLarge as e:
            raise _too_large(e)
        except errors.Infeasible as e:
            # rounded loads reach twice the capacity, the oracle packs within it
            logger.warning("Oracle found no packing within capacity: %s", e.message)
            note = "oracle infeasible within capacity: {}".format(e.message)
    run = report.weighted_report(instance, prepared, fractional, rounded, _digest(instance), elapsed(), oracle=exact,
                                 oracle_note=note)
    _emit(run.to_json(), args.out)
    return run


def cmd_incremental(args):
    """
    Greedy steps one by one, one CSV row per number of middleboxes with the optimal value next to it when
    --oracle is set.
    """
    instance = load_unweighted(args)
    sets = build_feasibility(instance)
    trace = greedy.incremental_extend(greedy.GreedyTrace.start(sets, instance.capacity), args.budget_steps,
                                      args.threads, args.strategy)
    optimum = functools.partial(oracle.max_assignment_for_n, limit=args.oracle_limit) if args.oracle else None
    try:
        rows = report.incremental_series(instance, sets, trace, optimum)
    except errors.TooLarge as e:
        raise _too_large(e)
    _emit(_csv_text(rows, report.INCREMENTAL_COLUMNS), args.out)
    return rows


def _csv_text(rows, columns):
    buffer = io.StringIO()
    report.write_csv(rows, columns, buffer)
    return buffer.getvalue()


def cmd_gen(args):
    """
    Writes a random scenario as instance JSON, unweighted on any topology, weighted (--weighted) on SNDlib files.
    """
    config = _scenario(args, args.topology)
    if args.weighted:
        config.keep_probability = args.keep
        instance = generator.weighted_instance(config, parser.parse_sndlib(_read(args.topology)))
    else:
        instance = generator.generate_unweighted_scenario(config)
    text = generator.write_instance(instance, config)
    _emit(text, args.out)
    return text


def cmd_bench(args):
    """
    Runs a batch configuration and writes the metrics CSV, one row per instance and algorithm.
    """
    config = bench.load_config(_read(args.config))
    threads = args.threads if args.threads > 1 else config["threads"]
    if threads > 1:
        init(args.log_handler, threads)
    rows = bench.run(config, threads, args.progress)
    _emit(_csv_text(rows, report.BENCH_COLUMNS), args.out)
    if args.summary is not None:
        _emit(json.dumps(report.bench_summary(rows), indent=2) + "\n", args.summary)
    return rows


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeat for debug output")
    common.add_argument("--threads", type=int, default=1, help="parallel workers (ray) for the candidate scans")
    common.add_argument("--seed", type=int, default=0, help="seed of every random choice")
    common.add_argument("--out", help="output file, stdout by default")
    return common


def _instance_options(command, p_default=0.3):
    command.add_argument("--stretch", type=float, help="stretch, overrides the instance")
    command.add_argument("--capacity", type=float, help="capacity, overrides the instance or scenario rule")
    command.add_argument("--metric", choices=METRICS, help="distance metric, overrides the instance")
    command.add_argument("--p", type=float, default=p_default, help="pair probability of generated scenarios")
    command.add_argument("--replication", type=int, default=0, help="replication index of generated scenarios")
    command.add_argument("--oracle", action="store_true", help="compare against the exact optimum")
    command.add_argument("--oracle-limit", type=int, default=oracle.DEFAULT_LIMIT,
                         help="largest number of candidates the oracle enumerates")


def build_parser():
    common = _common_options()
    arguments = argparse.ArgumentParser(prog="middlebox-placer", description="Capacitated middlebox placement")
    commands = arguments.add_subparsers(dest="command")
    commands.required = True

    solve = commands.add_parser("solve", parents=[common], help="greedy placement of an unweighted instance")
    solve.add_argument("instance", help="instance JSON or topology file (GraphML, SNDlib)")
    _instance_options(solve)
    solve.add_argument("--strategy", choices=[matching.BFS, matching.LAYERED], default=matching.BFS)
    solve.add_argument("--trace", help="write the greedy trace CSV to this file")
    solve.set_defaults(handler=cmd_solve)

    solve_weighted = commands.add_parser("solve-weighted", parents=[common], help="weighted placement with rounding")
    solve_weighted.add_argument("instance", help="weighted instance JSON or SNDlib file")
    _instance_options(solve_weighted)
    solve_weighted.add_argument("--keep", type=float, default=generator.KEEP_PROBABILITY,
                                help="probability of keeping an SNDlib demand")
    solve_weighted.set_defaults(handler=cmd_solve_weighted, oracle_limit=oracle.WEIGHTED_LIMIT)

    incremental = commands.add_parser("incremental", parents=[common], help="greedy series against the optimum")
    incremental.add_argument("instance", help="instance JSON or topology file")
    _instance_options(incremental)
    incremental.add_argument("--budget-steps", type=int, help="number of greedy steps, until complete by default")
    incremental.add_argument("--strategy", choices=[matching.BFS, matching.LAYERED], default=matching.BFS)
    incremental.set_defaults(handler=cmd_incremental)

    gen = commands.add_parser("gen", parents=[common], help="write a random scenario as instance JSON")
    gen.add_argument("--topology", required=True, help="GraphML, SNDlib or instance JSON file")
    gen.add_argument("--p", type=float, default=0.3, help="pair probability")
    gen.add_argument("--stretch", type=float, default=1.0)
    gen.add_argument("--replication", type=int, default=0)
    gen.add_argument("--capacity", type=float, help="fixed capacity instead of the scenario rule")
    gen.add_argument("--metric", choices=METRICS)
    gen.add_argument("--weighted", action="store_true", help="weighted scenario from the SNDlib demands")
    gen.add_argument("--keep", type=float, default=generator.KEEP_PROBABILITY)
    gen.set_defaults(handler=cmd_gen)

    batch = commands.add_parser("bench", parents=[common], help="run a batch configuration")
    batch.add_argument("config", help="bench configuration JSON")
    batch.add_argument("--summary", help="write batch statistics as JSON to this file")
    batch.add_argument("--progress", action="store_true", help="progress bar on stderr")
    batch.set_defaults(handler=cmd_bench)
    return arguments


def _integral(value):
    return int(value) if value is not None and float(value).is_integer() else value


def main(argv=None):
    args = build_parser().parse_args(argv)
    if hasattr(args, "capacity"):
        args.capacity = _integral(args.capacity)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    args.log_handler = handler
    logging.getLogger("middlebox_placer").setLevel(VERBOSITY[min(args.verbose, len(VERBOSITY) - 1)])
    try:
        init(handler, args.threads)
        args.handler(args)
    except errors.PlacementError as e:
        logger.debug("Command failed", exc_info=True)
        sys.stdout.write(json.dumps(e.to_dict(), indent=2, default=str) + "\n")
        return e.exit_code
    finally:
        logging.getLogger("middlebox_placer").removeHandler(handler)
        logging.getLogger("ray").removeHandler(handler)
    return 0


if __name__ == "__main__":
    sys.exit(main())
