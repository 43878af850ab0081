"""
Weighted and group requests. A request is a node pair or a node group with a demand p_j; a middlebox serves
requests whose demands sum to at most kappa. The placement is computed by a generalized greedy on the fractional
assignment value f(S) (an LP solved as a maximum profit flow) followed by slot rounding, which serves every
request with at most twice the capacity on every middlebox. Unlike the unweighted greedy this is not incremental:
rounding may move any request.
"""
import fractions
import itertools
import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from middlebox_placer.core import errors
from middlebox_placer.core.classes import FeasibilitySets, LENGTH, STRETCH, within_bound
from middlebox_placer.placement.flow import ProfitFlow, is_exact

logger = logging.getLogger(__name__)

LP_TOL = 1e-6

PAIR = "pair"
GROUP = "group"


class Request:
    """
    A weighted pair or group request. Create it with one of the factories::

        Request.pair(0, 4, demand=2.5)
        Request.group([1, 2, 7], demand=3)

    :ivar str kind: "pair" or "group"
    :ivar tuple nodes: sorted member nodes
    :ivar demand: load the request puts on its middlebox (int, Fraction or float)
    """

    def __init__(self, kind, nodes, demand):
        nodes = tuple(sorted(set(nodes)))
        if len(nodes) < 2:
            raise errors.DomainError("A request needs at least two distinct nodes, got {}".format(nodes))
        if kind == PAIR and len(nodes) != 2:
            raise errors.DomainError("A pair request has exactly two nodes, got {}".format(nodes))
        if not demand > 0:
            raise errors.DomainError("Demand must be positive, got {}".format(demand), nodes=list(nodes))
        self.kind = kind
        self.nodes = nodes
        self.demand = demand

    @staticmethod
    def pair(s, t, demand):
        return Request(PAIR, (s, t), demand)

    @staticmethod
    def group(nodes, demand):
        nodes = tuple(nodes)
        return Request(PAIR if len(set(nodes)) == 2 else GROUP, nodes, demand)

    def __repr__(self):
        return "Request({}, {}, demand={})".format(self.kind, list(self.nodes), self.demand)

    def __eq__(self, other):
        return (isinstance(other, Request) and self.kind == other.kind and self.nodes == other.nodes and
                self.demand == other.demand)

    def __ne__(self, other):
        return not self == other

    def member_pairs(self):
        return list(itertools.combinations(self.nodes, 2))


def _all_member_pairs(routes, bounds):
    return bool(np.all(within_bound(routes, bounds)))


def _summed(routes, bounds):
    return bool(within_bound(routes.sum(), bounds.sum()))


def _worst(routes, bounds):
    return bool(within_bound(routes.max(), bounds.max()))


GROUP_PREDICATES = {
    "all-pairs": _all_member_pairs,
    "sum": _summed,
    "max": _worst,
}


class WeightedInstance:
    """
    Placement problem with weighted pair and group requests. The parameters match
    :class:`~middlebox_placer.core.classes.PlacementInstance` except for:

    :param list requests: Request instances, duplicates are distinct demand units
    :param capacity: total demand a middlebox may serve, positive int, Fraction or float
    :param str group_predicate: how the route constraint applies to a group: "all-pairs" (every member pair within
        the bound), "sum" (summed over member pairs) or "max" (worst member pair against the largest bound)
    """

    def __init__(self, network, distances, requests, capacity, stretch=1.0, candidates=None, constraint=STRETCH,
                 max_length=None, metric="edge-weight", group_predicate="all-pairs"):
        self.network = network
        self.distances = distances
        self.requests = list(requests)
        self.capacity = capacity
        self.stretch = float(stretch)
        self.candidates = sorted(set(candidates)) if candidates is not None else list(range(network.node_count))
        self.constraint = constraint
        self.max_length = None if max_length is None else float(max_length)
        self.metric = metric
        self.group_predicate = group_predicate

        if not self.candidates:
            raise errors.DomainError("The set of candidate locations must not be empty")
        if not capacity > 0:
            raise errors.DomainError("Capacity must be positive, got {}".format(capacity))
        if self.stretch < 1:
            raise errors.DomainError("Stretch must be at least 1, got {}".format(self.stretch))
        if constraint == LENGTH and self.max_length is None:
            raise errors.DomainError("The length constraint needs max_length")
        if group_predicate not in GROUP_PREDICATES:
            raise errors.DomainError("Unknown group predicate {}, choose one of {}".format(
                group_predicate, ", ".join(sorted(GROUP_PREDICATES))))
        for index, request in enumerate(self.requests):
            if max(request.nodes) >= network.node_count:
                raise errors.DomainError("Request {} refers to an unknown node".format(request), request_index=index)
            for s, t in request.member_pairs():
                if not distances.reachable(s, t):
                    raise errors.DomainError("Request {} spans disconnected nodes".format(request),
                                             request_index=index)

    def __repr__(self):
        return "WeightedInstance(n={}, requests={}, candidates={}, capacity={})".format(
            self.network.node_count, len(self.requests), len(self.candidates), self.capacity)

    def is_feasible(self, u, request):  # type: (int, Request) -> bool
        d = self.distances.d
        member_pairs = request.member_pairs()
        sources = np.array([s for s, _ in member_pairs])
        targets = np.array([t for _, t in member_pairs])
        routes = d[sources, u] + d[u, targets]
        if self.constraint == LENGTH:
            bounds = np.full(len(member_pairs), self.max_length)
        else:
            bounds = self.stretch * d[sources, targets]
        return GROUP_PREDICATES[self.group_predicate](routes, bounds)


def build_request_feasibility(instance):  # type: (WeightedInstance) -> FeasibilitySets
    """
    Feasibility sets over requests: for every candidate the requests it may serve under the group predicate.
    """
    by_candidate = {u: [j for j, request in enumerate(instance.requests) if instance.is_feasible(u, request)]
                    for u in instance.candidates}
    return FeasibilitySets(by_candidate, len(instance.requests))


class PreparedRequests:
    """
    Result of :func:`preprocess`, the input of every fractional computation. Kept requests are renumbered
    0..n-1 in their original order.

    :ivar list kept: original index of every kept request
    :ivar list demands: demand of every kept request
    :ivar capacity: kappa
    :ivar dict entries: candidate -> kept request indices it may serve
    :ivar list deleted: (candidate, original request index) entries zeroed for violating the route constraint
    :ivar list rejected: original indices of requests with demand above the capacity
    """

    def __init__(self, kept, demands, capacity, entries, deleted, rejected):
        self.kept = kept
        self.demands = demands
        self.capacity = capacity
        self.entries = entries
        self.deleted = deleted
        self.rejected = rejected
        self.exact = is_exact(capacity, *demands)

    @property
    def request_count(self):
        return len(self.demands)

    @property
    def candidates(self):
        return sorted(self.entries)

    def entry_list(self, middleboxes):
        return [(u, j) for u in middleboxes for j in self.entries[u]]

    def threshold_exceeded(self, value):
        """
        The stopping rule of the generalized greedy, f(S) > n - 1, exact for rational input.
        """
        if self.exact:
            return value > self.request_count - 1
        return value > self.request_count - 1 + LP_TOL


def preprocess(requests, sets, capacity):  # type: (list, FeasibilitySets, ...) -> PreparedRequests
    """
    Deletes requests whose demand exceeds the capacity (reported as rejected) and zeroes every candidate-request
    entry violating the route constraint. Only candidate locations appear in the sets, so entries at illegal
    locations never exist.

    :param list requests: Request instances
    :param FeasibilitySets sets: feasibility sets over the requests, see :func:`build_request_feasibility`
    :param capacity: kappa
    :return: PreparedRequests
    """
    kept, rejected = [], []
    for j, request in enumerate(requests):
        if not request.demand > 0:
            raise errors.DomainError("Demand must be positive, got {}".format(request.demand), request_index=j)
        if request.demand > capacity:
            rejected.append(j)
        else:
            kept.append(j)
    if rejected:
        logger.warning("%d requests exceed the capacity %s and are rejected", len(rejected), capacity)

    renumbered = {j: k for k, j in enumerate(kept)}
    entries = {}
    deleted = []
    for u in sets.candidates:
        admissible = set(sets.by_candidate[u])
        entries[u] = [renumbered[j] for j in sets.by_candidate[u] if j in renumbered]
        deleted.extend((u, j) for j in kept if j not in admissible)
    return PreparedRequests(kept, [requests[j].demand for j in kept], capacity, entries, deleted, rejected)


class FractionalAssignment:
    """
    Solution of the fractional assignment LP on a set of middleboxes.

    :ivar list middleboxes: the set S
    :ivar dict x: (candidate, kept request index) -> fraction in [0, 1], zero entries omitted
    :ivar objective: f(S), the sum of all fractions
    """

    def __init__(self, middleboxes, x, objective, prepared):
        self.middleboxes = list(middleboxes)
        self.x = x
        self.objective = objective
        self.prepared = prepared

    def __repr__(self):
        return "FractionalAssignment(S={}, f={})".format(self.middleboxes, self.objective)

    def load(self, u):
        return sum((self.prepared.demands[j] * value for (i, j), value in self.x.items() if i == u), 0)

    def served(self, j):
        return sum((value for (_, k), value in self.x.items() if k == j), 0)

    def is_integral(self):
        return all(value == 1 for value in self.x.values())

    def check(self):
        tolerance = 0 if self.prepared.exact else 1e-9
        for j in range(self.prepared.request_count):
            assert self.served(j) <= 1 + tolerance, "Request {} is served {} times".format(j, self.served(j))
        for u in self.middleboxes:
            assert self.load(u) <= self.prepared.capacity + tolerance, "Middlebox {} is overloaded".format(u)
        for (u, j), value in self.x.items():
            assert u in self.middleboxes and j in self.prepared.entries[u], "Entry ({}, {}) is deleted".format(u, j)
            assert 0 <= value <= 1 + tolerance, "Fraction {} out of range".format(value)


def solve_fractional(middleboxes, prepared):  # type: (..., PreparedRequests) -> FractionalAssignment
    """
    Optimal solution of the maximum fractional assignment LP restricted to the given middleboxes: maximize the sum
    of x_ij subject to every request being served at most once and every middlebox carrying at most kappa demand.
    """
    middleboxes = sorted(middleboxes)
    if not middleboxes or prepared.request_count == 0:
        return FractionalAssignment(middleboxes, {}, 0, prepared)
    solver = ProfitFlow(prepared.demands, prepared.capacity, middleboxes, prepared.entry_list(middleboxes))
    objective, flows = solver.solve()
    x = {(u, j): flow / solver.demands[j] for (u, j), flow in flows.items()}
    return FractionalAssignment(middleboxes, x, objective, prepared)


def gain(i, middleboxes, prepared, base=None):  # type: (int, ..., PreparedRequests, FractionalAssignment) -> ...
    """
    f(S + {i}) - f(S). The value f(S) may be passed as base to avoid solving it again.
    """
    assert i not in middleboxes, "Middlebox {} is already in the set".format(i)
    if base is None:
        base = solve_fractional(middleboxes, prepared)
    if not prepared.entries.get(i):
        return 0
    return solve_fractional(list(middleboxes) + [i], prepared).objective - base.objective


def _scan_gains(candidates, middleboxes, prepared, base):
    return [(gain(i, middleboxes, prepared, base), i) for i in candidates]


_scan_task = None


def _parallel_gains(candidates, middleboxes, prepared, base, threads):
    global _scan_task
    import ray
    if _scan_task is None:
        _scan_task = ray.remote(num_cpus=1)(_scan_gains)
    shared = ray.put(prepared)
    chunks = [candidates[k::threads] for k in range(threads)]
    results = ray.get([_scan_task.remote(chunk, middleboxes, shared, base) for chunk in chunks if chunk])
    return [item for chunk in results for item in chunk]


def generalized_greedy(prepared, threads=1):  # type: (PreparedRequests, int) -> tuple
    """
    Adds the candidate with the largest gain (smallest node id on ties) until f(S) > n - 1 or every candidate is
    used.

    :param PreparedRequests prepared: preprocessed requests
    :param int threads: parallel workers for the gain scans, ray must be initialized when greater than 1
    :return: tuple (S, FractionalAssignment of S)
    :raises Infeasible: when even all candidates do not reach the threshold
    """
    middleboxes = []
    current = solve_fractional(middleboxes, prepared)
    candidates = prepared.candidates
    while len(middleboxes) < len(candidates) and not prepared.threshold_exceeded(current.objective):
        remaining = [i for i in candidates if i not in middleboxes]
        if threads > 1 and len(remaining) > 1:
            gains = _parallel_gains(remaining, middleboxes, prepared, current, threads)
        else:
            gains = _scan_gains(remaining, middleboxes, prepared, current)
        best_gain, best = max(gains, key=lambda item: (item[0], -item[1]))
        if best_gain <= 0:
            # submodularity: no positive gain now means f cannot grow any further
            break
        middleboxes.append(best)
        current = solve_fractional(middleboxes, prepared)
        logger.info("Generalized greedy added middlebox %d, f(S) = %s", best, current.objective)

    if not prepared.threshold_exceeded(current.objective):
        raise errors.Infeasible(
            "The fractional assignment reaches only {} of {} requests".format(
                float(current.objective), prepared.request_count),
            objective=float(current.objective),
            requests=prepared.request_count,
            middleboxes=middleboxes
        )
    return middleboxes, current


class RoundedSolution:
    """
    Integral assignment of every kept request.

    :ivar list middleboxes: the deployed set S
    :ivar dict assignment: original request index -> middlebox
    :ivar dict load: middlebox -> total demand served
    :ivar capacity: kappa
    """

    def __init__(self, middleboxes, assignment, load, capacity):
        self.middleboxes = list(middleboxes)
        self.assignment = assignment
        self.load = load
        self.capacity = capacity

    def __repr__(self):
        return "RoundedSolution(S={}, max relative load={:.3f})".format(self.middleboxes, self.max_relative_load())

    def relative_loads(self):
        return {u: float(self.load[u]) / float(self.capacity) for u in self.middleboxes}

    def max_relative_load(self):
        return max(self.relative_loads().values()) if self.middleboxes else 0.0

    def violates_capacity(self):
        return any(self.load[u] > self.capacity for u in self.middleboxes)


def _fill_slots(fractional, prepared):
    # slot filling: requests in non-increasing demand order spread over unit slots of their middlebox
    exact = prepared.exact
    edges = set()
    slot_ids = []
    for u in fractional.middleboxes:
        touching = sorted((j for (i, j) in fractional.x if i == u), key=lambda j: (-prepared.demands[j], j))
        slot, room = 0, 1
        used_slot = False
        for j in touching:
            remaining = fractional.x[(u, j)]
            while remaining > 0 and (exact or remaining > 1e-12):
                placed = min(remaining, room)
                edges.add((j, len(slot_ids) + slot))
                used_slot = True
                remaining -= placed
                room -= placed
                if room <= 0 or (not exact and room <= 1e-12):
                    slot, room, used_slot = slot + 1, 1, False
        slot_ids.extend([u] * (slot + (1 if used_slot else 0)))
    return edges, slot_ids


def round_solution(fractional, prepared):  # type: (FractionalAssignment, PreparedRequests) -> RoundedSolution
    """
    Rounds the fractional assignment: every middlebox gets ceil(sum_j x_ij) unit slots filled by its requests in
    non-increasing demand order, then a perfect matching of requests to slots picks one middlebox per request.
    The load of a middlebox stays below kappa plus the largest demand, hence below 2 kappa.

    :raises RoundingFailed: when f(S) <= n - 1, there is then no guarantee every request can be matched
    """
    if not prepared.threshold_exceeded(fractional.objective):
        raise errors.RoundingFailed("Rounding needs f(S) > n - 1, got f(S) = {} for n = {}".format(
            fractional.objective, prepared.request_count))
    n = prepared.request_count
    assignment = {}
    if n:
        edges, slot_ids = _fill_slots(fractional, prepared)
        rows = [j for j, _ in sorted(edges)]
        cols = [slot for _, slot in sorted(edges)]
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, len(slot_ids)))
        matched = maximum_bipartite_matching(graph, perm_type='column')
        if np.any(matched < 0):
            raise errors.RoundingFailed("No slot matches requests {}".format(np.flatnonzero(matched < 0).tolist()))
        assignment = {prepared.kept[j]: slot_ids[matched[j]] for j in range(n)}

    zero = fractions.Fraction(0) if prepared.exact else 0.0
    load = {u: zero for u in fractional.middleboxes}
    demand_of = dict(zip(prepared.kept, prepared.demands))
    for j, u in assignment.items():
        load[u] += demand_of[j]
    solution = RoundedSolution(fractional.middleboxes, assignment, load, prepared.capacity)
    logger.info("Rounded %d requests onto %d middleboxes, max relative load %.3f", n, len(solution.middleboxes),
                solution.max_relative_load())
    return solution


def solve_weighted(instance, threads=1):  # type: (WeightedInstance, int) -> tuple
    """
    Complete pipeline: feasibility, preprocessing, generalized greedy and rounding.

    :return: tuple (PreparedRequests, FractionalAssignment, RoundedSolution)
    """
    sets = build_request_feasibility(instance)
    prepared = preprocess(instance.requests, sets, instance.capacity)
    _, fractional = generalized_greedy(prepared, threads)
    return prepared, fractional, round_solution(fractional, prepared)

