"""
Run reports: independent re-validation of computed placements, the evaluation metrics and the report JSON v1 and
CSV writers. Nothing here trusts the solvers' bookkeeping, every check goes back to the distance matrix.
"""
import csv
import json
import logging
import math

import numpy as np

from middlebox_placer.core import errors
from middlebox_placer.core.classes import LENGTH, within_bound

logger = logging.getLogger(__name__)

REPORT_FORMAT = "middlebox-placer-report"
REPORT_VERSION = 1

TRACE_COLUMNS = ["iteration", "chosen", "phi_after", "gain"]
INCREMENTAL_COLUMNS = ["n", "phi_greedy", "phi_optimal", "relative_difference"]
BENCH_COLUMNS = [
    "topology", "p", "stretch", "replication", "algorithm", "seed", "nodes", "requests", "capacity",
    "middleboxes", "oracle_optimum", "ratio", "max_relative_difference", "max_relative_load", "capacity_violated",
    "wall_time", "status", "error",
]


def _route_ok(instance, u, s, t):
    d = instance.distances.d
    bound = instance.max_length if instance.constraint == LENGTH else instance.stretch * d[s, t]
    return bool(within_bound(d[s, u] + d[u, t], bound))


def validate_assignment(instance, middleboxes, assignment):
    """
    Checks an unweighted placement against the instance: every pair is assigned, only to a deployed middlebox on a
    candidate location, along a route within the bound, and no middlebox serves more than kappa pairs.

    :param PlacementInstance instance: the instance
    :param middleboxes: deployed locations
    :param dict assignment: pair index -> middlebox
    :raises InvalidAssignment: on the first violation
    """
    deployed = set(middleboxes)
    candidates = set(instance.candidates)
    if not deployed <= candidates:
        raise errors.InvalidAssignment("Middleboxes {} are not on candidate locations".format(
            sorted(deployed - candidates)))
    missing = [p for p in range(len(instance.pairs)) if p not in assignment]
    if missing:
        raise errors.InvalidAssignment("Pairs {} are not served".format(missing), pairs=missing)
    loads = dict.fromkeys(deployed, 0)
    for p, m in assignment.items():
        pair = instance.pairs[p]
        if m not in deployed:
            raise errors.InvalidAssignment("Pair {} uses undeployed middlebox {}".format(pair, m), pair_index=p)
        if not _route_ok(instance, m, pair.s, pair.t):
            raise errors.InvalidAssignment("Route of pair {} via {} violates the constraint".format(pair, m),
                                           pair_index=p, middlebox=m)
        loads[m] += 1
    overloaded = sorted(m for m, load in loads.items() if load > instance.capacity)
    if overloaded:
        raise errors.InvalidAssignment("Middleboxes {} exceed the capacity".format(overloaded), middleboxes=overloaded)
    return loads


def validate_weighted(instance, prepared, rounded, augmentation=2):
    """
    Checks a rounded weighted placement: every kept request is served by a deployed middlebox satisfying the route
    constraint, and no load exceeds augmentation times kappa.

    :raises InvalidAssignment: on the first violation
    """
    deployed = set(rounded.middleboxes)
    missing = [j for j in prepared.kept if j not in rounded.assignment]
    if missing:
        raise errors.InvalidAssignment("Requests {} are not served".format(missing), requests=missing)
    loads = dict.fromkeys(deployed, 0)
    for j, u in rounded.assignment.items():
        request = instance.requests[j]
        if u not in deployed:
            raise errors.InvalidAssignment("Request {} uses undeployed middlebox {}".format(j, u), request_index=j)
        if not instance.is_feasible(u, request):
            raise errors.InvalidAssignment("Request {} is not feasible at {}".format(j, u), request_index=j,
                                           middlebox=u)
        loads[u] += request.demand
    overloaded = sorted(u for u, load in loads.items() if load > augmentation * instance.capacity)
    if overloaded:
        raise errors.InvalidAssignment("Middleboxes {} exceed {} times the capacity".format(overloaded, augmentation),
                                       middleboxes=overloaded)
    return loads


def wolsey_bound(capacity, pair_count):
    """
    Approximation factor of the greedy placement, 1 + ln(min(capacity, |P|)).
    """
    return 1.0 + math.log(min(capacity, pair_count)) if pair_count else 1.0


def relative_difference(phi_greedy, phi_optimal):
    """
    (phi_optimal - phi_greedy) / phi_optimal, defined as 0 when the optimum serves nothing.
    """
    return 0.0 if phi_optimal == 0 else float(phi_optimal - phi_greedy) / phi_optimal


def relative_difference_series(greedy_series, optimal_series):
    return [relative_difference(g, o) for g, o in zip(greedy_series, optimal_series)]


def incremental_series(instance, sets, trace, optimum=None):
    """
    Rows n, phi of the first n greedy steps, phi of the best n middleboxes and their relative difference, for
    n = 0 .. number of greedy steps.

    :param optimum: callable (instance, sets, n) -> ExactResult, the optimal column stays empty when None
    :return: list of dict rows with the keys of INCREMENTAL_COLUMNS
    """
    rows = []
    for n, phi_greedy in enumerate(trace.phi_series()):
        phi_optimal = optimum(instance, sets, n).optimum if optimum is not None else None
        rows.append({
            "n": n,
            "phi_greedy": phi_greedy,
            "phi_optimal": phi_optimal,
            "relative_difference": None if phi_optimal is None else relative_difference(phi_greedy, phi_optimal),
        })
    return rows


def plain_number(value):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, np.generic):
        return value.item()
    return float(value)


class RunReport:
    """
    Outcome of one solver run, see the report JSON v1 reference for the emitted document.

    :ivar str algorithm: algorithm id
    :ivar str digest: sha256 of the instance document
    :ivar list middleboxes: deployed locations in order of deployment
    :ivar list assignment: dicts with the served pair or request and its middlebox
    :ivar list loads: dicts with middlebox, load and relative load
    :ivar dict metrics: evaluation metrics, see :func:`unweighted_report` and :func:`weighted_report`
    :ivar float wall_time: seconds
    """

    def __init__(self, algorithm, digest, summary, middleboxes, assignment, loads, metrics, wall_time):
        self.algorithm = algorithm
        self.digest = digest
        self.summary = summary
        self.middleboxes = list(middleboxes)
        self.assignment = assignment
        self.loads = loads
        self.metrics = metrics
        self.wall_time = wall_time

    def __repr__(self):
        return "RunReport({}, middleboxes={})".format(self.algorithm, len(self.middleboxes))

    @property
    def middlebox_count(self):
        return len(self.middleboxes)

    def to_dict(self, wall_time=True):
        document = {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "algorithm": self.algorithm,
            "instance": self.digest,
        }
        document.update(self.summary)
        document["middlebox_count"] = self.middlebox_count
        document["middleboxes"] = self.middleboxes
        document["assignment"] = self.assignment
        document["loads"] = self.loads
        document["metrics"] = self.metrics
        if wall_time:
            document["wall_time"] = self.wall_time
        return document

    def to_json(self, wall_time=True):
        return json.dumps(self.to_dict(wall_time), indent=2) + "\n"


def _oracle_metrics(metrics, count, oracle, bound):
    metrics["approximation_bound"] = bound
    if oracle is not None:
        metrics["oracle_optimum"] = oracle.optimum
        metrics["approximation_ratio"] = float(count) / oracle.optimum if oracle.optimum else 1.0
    return metrics


def unweighted_report(instance, trace, digest, wall_time, algorithm="greedy", oracle=None, incremental=None):
    """
    Validates a greedy trace against the instance and builds its report.

    :param GreedyTrace trace: complete greedy trace
    :param ExactResult oracle: exact minimum for the approximation ratio, optional
    :param list incremental: rows of :func:`incremental_series`, optional
    :raises InvalidAssignment: when the placement does not validate
    """
    assignment = trace.state.as_dict()
    loads = validate_assignment(instance, trace.middleboxes, assignment)
    count = len(trace.middleboxes)
    metrics = {"phi_series": trace.phi_series()}
    _oracle_metrics(metrics, count, oracle, wolsey_bound(instance.capacity, len(instance.pairs)))
    if incremental is not None:
        differences = [row["relative_difference"] for row in incremental if row["relative_difference"] is not None]
        metrics["relative_difference_series"] = differences
        metrics["max_relative_difference"] = max(differences) if differences else None
    return RunReport(
        algorithm=algorithm,
        digest=digest,
        summary={
            "nodes": instance.network.node_count,
            "pairs": len(instance.pairs),
            "capacity": instance.capacity,
            "stretch": instance.stretch,
        },
        middleboxes=trace.middleboxes,
        assignment=[{"pair": [instance.pairs[p].s, instance.pairs[p].t], "middlebox": m}
                    for p, m in sorted(assignment.items())],
        loads=[{"middlebox": m, "load": loads[m], "relative_load": float(loads[m]) / instance.capacity}
               for m in trace.middleboxes],
        metrics=metrics,
        wall_time=wall_time
    )


def weighted_report(instance, prepared, fractional, rounded, digest, wall_time, algorithm="weighted-greedy",
                    oracle=None, oracle_note=None):
    """
    Validates a rounded weighted placement against the instance and builds its report, including the relative
    load of every middlebox. ``oracle_note`` explains a missing oracle optimum.
    """
    loads = validate_weighted(instance, prepared, rounded)
    count = len(rounded.middleboxes)
    relative = rounded.relative_loads()
    metrics = {
        "fractional_objective": plain_number(fractional.objective),
        "max_relative_load": rounded.max_relative_load(),
        "capacity_violated": rounded.violates_capacity(),
        "rejected_requests": list(prepared.rejected),
    }
    _oracle_metrics(metrics, count, oracle, 1.0 + math.log(prepared.request_count) if prepared.request_count else 1.0)
    if oracle_note is not None:
        metrics.update(oracle_optimum=None, approximation_ratio=None, oracle_note=oracle_note)
    return RunReport(
        algorithm=algorithm,
        digest=digest,
        summary={
            "nodes": instance.network.node_count,
            "requests": len(instance.requests),
            "capacity": plain_number(instance.capacity),
            "stretch": instance.stretch,
        },
        middleboxes=rounded.middleboxes,
        assignment=[{"request": list(instance.requests[j].nodes), "demand": plain_number(instance.requests[j].demand),
                     "middlebox": u} for j, u in sorted(rounded.assignment.items())],
        loads=[{"middlebox": u, "load": plain_number(loads[u]), "relative_load": relative[u]}
               for u in rounded.middleboxes],
        metrics=metrics,
        wall_time=wall_time
    )


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def write_csv(rows, columns, stream):
    """
    Writes dict rows with a header line, quoting as RFC 4180 requires.
    """
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_value(row.get(column)) for column in columns])


def write_trace_csv(trace, stream):
    write_csv([dict(zip(TRACE_COLUMNS, step.as_row())) for step in trace.steps], TRACE_COLUMNS, stream)


def bench_summary(rows):
    """
    Batch statistics: median and maximum approximation ratio over the rows with an oracle, and the frequency of
    weighted rows whose rounding exceeded the capacity.
    """
    succeeded = [row for row in rows if row.get("status") == "ok"]
    ratios = [row["ratio"] for row in succeeded if row.get("ratio") is not None]
    weighted = [row for row in succeeded if row.get("capacity_violated") is not None]
    return {
        "rows": len(rows),
        "errors": len(rows) - len(succeeded),
        "median_ratio": float(np.median(ratios)) if ratios else None,
        "max_ratio": max(ratios) if ratios else None,
        "violation_frequency": (float(sum(1 for row in weighted if row["capacity_violated"])) / len(weighted)
                                if weighted else None),
    }
