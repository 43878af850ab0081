"""
Batch studies: topologies x pair probabilities x stretches x replications x algorithms, one metrics row per
combination. Rows are independent and run on ray workers when more than one thread is requested; rows are always
returned in configuration order.
"""
import json
import logging

from middlebox_placer.core import errors
from middlebox_placer.core.classes import FeasibilitySets, build_feasibility, feasible_total_capacity_check
from middlebox_placer.core.io_wrapper import generator, parser
from middlebox_placer.core.utility import print_progress, timer
from middlebox_placer.placement import greedy, matching, oracle, report, weighted

logger = logging.getLogger(__name__)

GREEDY = "greedy"
GREEDY_LAYERED = "greedy-layered"
WEIGHTED = "weighted"
ALGORITHMS = (GREEDY, GREEDY_LAYERED, WEIGHTED)

DEFAULTS = {
    "topologies": [],
    "p_values": [0.3],
    "stretches": "grid",
    "replications": 1,
    "algorithms": [GREEDY],
    "oracle": False,
    "oracle_limit": oracle.DEFAULT_LIMIT,
    "seed": 0,
    "metric": None,
    "threads": 1,
}


def load_config(data):  # type: (bytes) -> dict
    """
    Reads a bench configuration JSON and fills in the defaults.

    :raises ParseError: on invalid JSON or unknown keys and algorithms
    """
    try:
        document = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    except UnicodeDecodeError as e:
        raise errors.ParseError("Bench configuration is not valid UTF-8", position=e.start)
    except ValueError as e:
        raise errors.ParseError("Bench configuration is not valid JSON: {}".format(e))
    unknown = sorted(set(document) - set(DEFAULTS))
    if unknown:
        raise errors.ParseError("Unknown bench configuration keys {}".format(unknown), keys=unknown)
    config = dict(DEFAULTS)
    config.update(document)
    if config["stretches"] == "grid":
        config["stretches"] = generator.stretch_grid()
    bad = sorted(set(config["algorithms"]) - set(ALGORITHMS))
    if bad:
        raise errors.ParseError("Unknown algorithms {}, choose from {}".format(bad, list(ALGORITHMS)))
    return config


def tasks(config):
    """
    :return: one dict per row, in the order topology, p, stretch, replication, algorithm
    """
    return [{"topology": topology, "p": p, "stretch": stretch, "replication": replication, "algorithm": algorithm}
            for topology in config["topologies"]
            for p in config["p_values"]
            for stretch in config["stretches"]
            for replication in range(config["replications"])
            for algorithm in config["algorithms"]]


def _scenario(task, config):
    return generator.ScenarioConfig(task["topology"], p=task["p"], stretch=task["stretch"], seed=config["seed"],
                                    replication=task["replication"], metric=config["metric"])


def _unweighted_row(task, config, row):
    instance = generator.generate_unweighted_scenario(_scenario(task, config))
    strategy = matching.LAYERED if task["algorithm"] == GREEDY_LAYERED else matching.BFS
    with timer() as elapsed:
        sets = build_feasibility(instance)
        feasible_total_capacity_check(instance, sets)
        trace = greedy.greedy_place(instance, sets, strategy=strategy)
    report.validate_assignment(instance, trace.middleboxes, trace.state.as_dict())
    row.update(nodes=instance.network.node_count, requests=len(instance.pairs), capacity=instance.capacity,
               middleboxes=len(trace.middleboxes), wall_time=elapsed())
    if config["oracle"]:
        try:
            exact = oracle.exact_min_middleboxes(instance, sets, config["oracle_limit"])
            series = report.incremental_series(
                instance, sets, trace,
                lambda i, s, n: oracle.max_assignment_for_n(i, s, n, config["oracle_limit"]))
        except errors.TooLarge as e:
            row["error"] = "oracle skipped: {}".format(e.message)
            return
        row["oracle_optimum"] = exact.optimum
        row["ratio"] = float(len(trace.middleboxes)) / exact.optimum if exact.optimum else 1.0
        row["max_relative_difference"] = max(entry["relative_difference"] for entry in series)


def _weighted_row(task, config, row):
    with open(task["topology"], "rb") as f:
        sndlib = parser.parse_sndlib(f.read())
    instance = generator.weighted_instance(_scenario(task, config), sndlib)
    with timer() as elapsed:
        prepared, fractional, rounded = weighted.solve_weighted(instance)
    report.validate_weighted(instance, prepared, rounded)
    row.update(nodes=instance.network.node_count, requests=len(instance.requests),
               capacity=report.plain_number(instance.capacity), middleboxes=len(rounded.middleboxes),
               wall_time=elapsed(), max_relative_load=rounded.max_relative_load(),
               capacity_violated=rounded.violates_capacity())
    if config["oracle"]:
        kept = [instance.requests[j] for j in prepared.kept]
        sets = FeasibilitySets(prepared.entries, prepared.request_count)
        try:
            exact = oracle.exact_weighted_min_middleboxes(kept, sets, instance.capacity,
                                                          min(config["oracle_limit"], oracle.WEIGHTED_LIMIT))
        except errors.TooLarge as e:
            row["error"] = "oracle skipped: {}".format(e.message)
            return
        except errors.Infeasible as e:
            row.update(oracle_optimum=None, error="oracle infeasible within capacity: {}".format(e.message))
            return
        row["oracle_optimum"] = exact.optimum
        row["ratio"] = float(len(rounded.middleboxes)) / exact.optimum if exact.optimum else 1.0


def run_row(task, config):
    """
    Computes one bench row. Failures are captured in the status and error columns, they never abort the batch.
    """
    row = dict(task, seed=config["seed"], status="ok")
    try:
        if task["algorithm"] == WEIGHTED:
            _weighted_row(task, config, row)
        else:
            _unweighted_row(task, config, row)
    except (errors.PlacementError, IOError) as e:
        row["status"] = "error"
        row["error"] = "{}: {}".format(type(e).__name__, e)
        logger.warning("Bench row %s failed: %s", task, e)
    else:
        logger.info("Bench row %s: %s middleboxes", task, row.get("middleboxes"))
    return row


def run(config, threads=None, progress=False):
    """
    Runs every row of the configuration.

    :param dict config: configuration from :func:`load_config`
    :param int threads: ray workers, the configured value when None; ray must be initialized when greater than 1
    :param bool progress: draw a progress bar on stderr
    :return: list of rows with the keys of BENCH_COLUMNS
    """
    threads = config["threads"] if threads is None else threads
    todo = tasks(config)
    rows = []
    if threads > 1 and len(todo) > 1:
        import ray
        remote_row = ray.remote(num_cpus=1)(run_row)
        shared = ray.put(config)
        pending = [remote_row.remote(task, shared) for task in todo]
        for index, handle in enumerate(pending, start=1):
            rows.append(ray.get(handle))
            if progress:
                print_progress(index, len(todo), prefix="Bench:")
    else:
        for index, task in enumerate(todo, start=1):
            rows.append(run_row(task, config))
            if progress:
                print_progress(index, len(todo), prefix="Bench:")
    logger.info("Bench finished: %s", report.bench_summary(rows))
    return rows
