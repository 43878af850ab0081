"""
Exact baselines by exhaustive subset enumeration, usable on desk scale instances only. Subsets are enumerated by
increasing cardinality and lexicographically within a cardinality, so the first witness found is the optimum and
the result is deterministic.
"""
import itertools
import logging
import time

from middlebox_placer.core import errors
from middlebox_placer.placement import matching

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 16
WEIGHTED_LIMIT = 12
WEIGHTED_REQUEST_LIMIT = 14


class ExactResult:
    """
    :ivar optimum: optimal value (middlebox count or number of served pairs)
    :ivar list middleboxes: witness middlebox set
    :ivar dict assignment: witness assignment, pair (or request) index -> middlebox
    :ivar int explored: number of subsets evaluated
    :ivar float elapsed: seconds spent
    """

    def __init__(self, optimum, middleboxes, assignment, explored, elapsed):
        self.optimum = optimum
        self.middleboxes = list(middleboxes)
        self.assignment = assignment
        self.explored = explored
        self.elapsed = elapsed

    def __repr__(self):
        return "ExactResult(optimum={}, middleboxes={}, explored={})".format(self.optimum, self.middleboxes,
                                                                             self.explored)


def _check_size(candidates, limit):
    if len(candidates) > limit:
        raise errors.TooLarge(
            "Exact enumeration over {} candidates exceeds the limit of {}".format(len(candidates), limit),
            candidates=len(candidates), limit=limit)


def _capacity_bound(sets, capacity, subset):
    return sum(min(capacity, len(sets.by_candidate[u])) for u in subset)


def _covers(sets, subset, pair_count):
    covered = set()
    for u in subset:
        covered.update(sets.by_candidate[u])
    return len(covered) == pair_count


def exact_min_middleboxes(instance, sets, limit=DEFAULT_LIMIT):
    """
    Smallest set of middleboxes serving every pair, the exact counterpart of the greedy placement.

    :param PlacementInstance instance: provides the capacity
    :param FeasibilitySets sets: feasibility sets of the instance
    :param int limit: largest number of candidates to enumerate over
    :return: ExactResult with the middlebox count as optimum
    :raises TooLarge: with more than limit candidates
    :raises Infeasible: when not even all candidates serve every pair
    """
    started = time.time()
    candidates = sets.candidates
    _check_size(candidates, limit)
    capacity = instance.capacity
    pair_count = sets.pair_count
    explored = 0
    if pair_count == 0:
        return ExactResult(0, [], {}, explored, time.time() - started)

    smallest = -(-pair_count // capacity)
    for k in range(smallest, len(candidates) + 1):
        for subset in itertools.combinations(candidates, k):
            if _capacity_bound(sets, capacity, subset) < pair_count or not _covers(sets, subset, pair_count):
                continue
            explored += 1
            state = matching.new_assignment(sets, capacity, subset)
            if state.assigned_count == pair_count:
                logger.debug("Exact minimum %d found after %d subsets", k, explored)
                return ExactResult(k, subset, state.as_dict(), explored, time.time() - started)
    raise errors.Infeasible("No set of candidates serves all {} pairs".format(pair_count), explored=explored)


def max_assignment_for_n(instance, sets, n, limit=DEFAULT_LIMIT):
    """
    Largest number of pairs served by exactly n middleboxes (all candidates when n exceeds their number, phi
    being monotone).

    :return: ExactResult with the number of served pairs as optimum
    :raises TooLarge: with more than limit candidates
    """
    started = time.time()
    candidates = sets.candidates
    _check_size(candidates, limit)
    if n < 0:
        raise errors.DomainError("The number of middleboxes must not be negative, got {}".format(n))
    n = min(n, len(candidates))
    capacity = instance.capacity
    pair_count = sets.pair_count

    best = ExactResult(0, [], {}, 0, 0.0)
    explored = 0
    if n > 0 and pair_count > 0:
        for subset in itertools.combinations(candidates, n):
            if min(pair_count, _capacity_bound(sets, capacity, subset)) <= best.optimum:
                continue
            explored += 1
            state = matching.new_assignment(sets, capacity, subset)
            if state.assigned_count > best.optimum:
                best = ExactResult(state.assigned_count, subset, state.as_dict(), 0, 0.0)
                if best.optimum == pair_count:
                    break
    best.explored = explored
    best.elapsed = time.time() - started
    return best


def _pack(order, demands, entries_of, residual, assignment, position):
    # branch and bound: requests by decreasing demand, each placed on a middlebox with enough residual capacity
    if position == len(order):
        return True
    j = order[position]
    remaining = sum(demands[k] for k in order[position:])
    if remaining > sum(residual.values()):
        return False
    for u in entries_of[j]:
        if residual[u] < demands[j]:
            continue
        residual[u] -= demands[j]
        assignment[j] = u
        if _pack(order, demands, entries_of, residual, assignment, position + 1):
            return True
        residual[u] += demands[j]
        del assignment[j]
    return False


def exact_weighted_min_middleboxes(requests, sets, capacity, limit=WEIGHTED_LIMIT,
                                   request_limit=WEIGHTED_REQUEST_LIMIT):
    """
    Smallest set of middleboxes admitting an integral assignment of every weighted request within the true capacity
    (no augmentation).

    :param list requests: Request instances
    :param FeasibilitySets sets: feasibility sets over the requests
    :param capacity: kappa
    :return: ExactResult, the assignment maps request indices to middleboxes
    :raises TooLarge: with more than limit candidates or request_limit requests
    :raises Infeasible: when no candidate set admits such an assignment
    """
    started = time.time()
    candidates = sets.candidates
    _check_size(candidates, limit)
    if len(requests) > request_limit:
        raise errors.TooLarge("Exact weighted enumeration over {} requests exceeds the limit of {}".format(
            len(requests), request_limit), requests=len(requests), limit=request_limit)
    demands = [request.demand for request in requests]
    oversized = [j for j, demand in enumerate(demands) if demand > capacity]
    if oversized:
        raise errors.Infeasible("Requests {} exceed the capacity".format(oversized), requests=oversized)
    if not requests:
        return ExactResult(0, [], {}, 0, time.time() - started)

    total = sum(demands)
    order = sorted(range(len(requests)), key=lambda j: (-demands[j], j))
    explored = 0
    for k in range(1, len(candidates) + 1):
        if total > k * capacity:
            continue
        for subset in itertools.combinations(candidates, k):
            if not _covers(sets, subset, len(requests)):
                continue
            explored += 1
            chosen = set(subset)
            entries_of = [[u for u in sets.by_pair[j] if u in chosen] for j in range(len(requests))]
            residual = {u: capacity for u in subset}
            assignment = {}
            if _pack(order, demands, entries_of, residual, assignment, 0):
                logger.debug("Exact weighted minimum %d found after %d subsets", k, explored)
                return ExactResult(k, subset, dict(assignment), explored, time.time() - started)
    raise errors.Infeasible("No set of candidates admits an assignment of all {} requests".format(len(requests)),
                            explored=explored)
