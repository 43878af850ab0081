"""
Module containing the core classes of the middlebox_placer project: the network, its distance metric and the
placement problem built on top of them. Nodes are always dense integers 0..n-1, a pair is denoted (s, t) and a
candidate middlebox location is denoted u, keep this in mind.
"""
import logging
import math
import os

import numpy as np

from middlebox_placer.core import errors

logger = logging.getLogger(__name__)

FEASIBILITY_RTOL = 1e-9

STRETCH = "stretch"
LENGTH = "length"


def init(logging_handler=logging.FileHandler(os.devnull), threads=1):
    """
    Should be called in the main calling script before solving anything, preferably once. It routes the logs of
    middlebox_placer and of ray to the given handler and starts ray when more than one worker is requested.

    :param logging.Handler logging_handler: handler receiving all package logs, discards them by default
    :param int threads: number of parallel workers, ray is only started when this is greater than 1
    """
    package_logger = logging.getLogger("middlebox_placer")
    if logging_handler not in package_logger.handlers:
        package_logger.addHandler(logging_handler)

    ray_logger = logging.getLogger('ray')
    ray_logger.addHandler(logging_handler)
    ray_logger.propagate = False

    if threads > 1:
        import ray
        if not ray.is_initialized():
            ray.init(num_cpus=threads, configure_logging=False)


class Network:
    """
    Weighted undirected network. Initialize it like this::

        network = Network(node_count=3, edges=[(0, 1, 1.0), (1, 2, 2.5)])

    Parallel edges collapse to the smallest weight, self loops and negative weights are rejected.

    :param int node_count: number of nodes, the nodes are 0..node_count-1
    :param edges: iterable of (u, v, weight) triples
    :param coordinates: optional list of (latitude, longitude) in degrees, one entry per node, None for unknown
    :param labels: optional list of node labels
    """

    def __init__(self, node_count, edges=(), coordinates=None, labels=None):
        # type: (int, ..., list, list) -> None
        assert node_count >= 0, "Node count must not be negative, got {}".format(node_count)
        self.node_count = node_count
        self.coordinates = list(coordinates) if coordinates is not None else [None] * node_count
        self.labels = list(labels) if labels is not None else [str(node) for node in range(node_count)]
        assert len(self.coordinates) == node_count, "Expected {} coordinates".format(node_count)
        assert len(self.labels) == node_count, "Expected {} labels".format(node_count)
        self.__weights = {}
        for u, v, weight in edges:
            self.add_edge(u, v, weight)

    def __repr__(self):
        return "Network(n={}, m={})".format(self.node_count, self.edge_count)

    def __eq__(self, other):
        return (isinstance(other, Network) and
                self.node_count == other.node_count and
                self.edges == other.edges and
                self.coordinates == other.coordinates and
                self.labels == other.labels)

    def __ne__(self, other):
        return not self == other

    def add_edge(self, u, v, weight):  # type: (int, int, float) -> None
        if u == v:
            raise errors.DomainError("Self loop on node {} is not allowed".format(u), node=u)
        if not (0 <= u < self.node_count and 0 <= v < self.node_count):
            raise errors.DomainError("Edge ({}, {}) refers to an unknown node".format(u, v), edge=[u, v])
        weight = float(weight)
        if weight < 0 or math.isnan(weight):
            raise errors.DomainError("Edge ({}, {}) has invalid weight {}".format(u, v, weight), edge=[u, v])
        key = (min(u, v), max(u, v))
        self.__weights[key] = min(weight, self.__weights.get(key, weight))

    @property
    def edges(self):
        """
        :return: sorted list of (u, v, weight) with u < v
        """
        return [(u, v, weight) for (u, v), weight in sorted(self.__weights.items())]

    @property
    def edge_count(self):
        return len(self.__weights)

    def has_coordinates(self):
        return all(coordinate is not None for coordinate in self.coordinates)

    def with_weights(self, weight_of):
        """
        Returns a copy of the network where every edge weight is replaced by weight_of(u, v, weight).
        """
        return Network(
            node_count=self.node_count,
            edges=[(u, v, weight_of(u, v, weight)) for u, v, weight in self.edges],
            coordinates=self.coordinates,
            labels=self.labels
        )


class DistanceMatrix:
    """
    Immutable matrix of shortest path distances. Unreachable node pairs have distance ``inf``.

    :ivar ndarray d: the n x n distance matrix, read only
    """

    def __init__(self, d):  # type: (np.ndarray) -> None
        d = np.array(d, dtype=np.float64)
        assert d.ndim == 2 and d.shape[0] == d.shape[1], "Distance matrix must be square, got {}".format(d.shape)
        d.flags.writeable = False
        self.d = d

    def __getitem__(self, item):
        return self.d[item]

    def __len__(self):
        return self.d.shape[0]

    def reachable(self, u, v):  # type: (int, int) -> bool
        return bool(np.isfinite(self.d[u, v]))


class Pair:
    """
    Unordered communicating node pair, canonicalized so that s < t.

    :ivar int s: smaller endpoint
    :ivar int t: larger endpoint
    :ivar stretch: reserved for an individual stretch bound, always None (all pairs share the instance stretch)
    """

    def __init__(self, s, t):  # type: (int, int) -> None
        if s == t:
            raise errors.DomainError("A pair needs two distinct nodes, got ({}, {})".format(s, t), pair=[s, t])
        self.s, self.t = (s, t) if s < t else (t, s)
        self.stretch = None

    def __repr__(self):
        return "({}, {})".format(self.s, self.t)

    def __iter__(self):
        return iter((self.s, self.t))

    def __eq__(self, other):
        return isinstance(other, Pair) and self.s == other.s and self.t == other.t

    def __ne__(self, other):
        return not self == other

    def __lt__(self, other):
        return (self.s, self.t) < (other.s, other.t)

    def __hash__(self):
        return hash((self.s, self.t))


def deduplicate_pairs(pairs):
    """
    Canonicalizes and deduplicates pairs keeping the first occurrence order. Duplicates are logged as a warning.

    :param pairs: iterable of Pair or (s, t) tuples
    :return: list of distinct Pair instances
    """
    seen = set()
    result = []
    for pair in pairs:
        pair = pair if isinstance(pair, Pair) else Pair(*pair)
        if pair in seen:
            logger.warning("Duplicate pair %s ignored", pair)
            continue
        seen.add(pair)
        result.append(pair)
    return result


class PlacementInstance:
    """
    The placement problem: route every pair via a middlebox placed on one of the candidate nodes, each middlebox
    serving at most capacity pairs. Initialize it like this::

        PlacementInstance(
            network=network,
            distances=compute_apsp(network, "edge-weight"),
            pairs=[(0, 2), (1, 3)],
            capacity=2,
            stretch=1.5
        )

    :param Network network: the network
    :param DistanceMatrix distances: shortest path metric of the network
    :param pairs: communicating pairs as Pair instances or (s, t) tuples, duplicates are dropped
    :param candidates: legal middlebox locations, all nodes by default
    :param int capacity: maximal number of pairs served by one middlebox (kappa)
    :param float stretch: maximal ratio of the route via a middlebox to the shortest route (rho)
    :param str constraint: "stretch" (default) or "length", the latter bounds the route via a middlebox by max_length
    :param float max_length: route length bound used with constraint="length"
    :param str metric: name of the metric the distances were computed with, kept for serialization
    """

    def __init__(self, network, distances, pairs, capacity, stretch=1.0, candidates=None, constraint=STRETCH,
                 max_length=None, metric="edge-weight"):
        # type: (Network, DistanceMatrix, list, int, float, ..., str, float, str) -> None
        self.network = network
        self.distances = distances
        self.pairs = deduplicate_pairs(pairs)
        self.candidates = sorted(set(candidates)) if candidates is not None else list(range(network.node_count))
        self.capacity = capacity
        self.stretch = float(stretch)
        self.constraint = constraint
        self.max_length = None if max_length is None else float(max_length)
        self.metric = metric
        self.__validate()

    def __repr__(self):
        return "PlacementInstance(n={}, pairs={}, candidates={}, capacity={}, {})".format(
            self.network.node_count, len(self.pairs), len(self.candidates), self.capacity,
            "stretch={}".format(self.stretch) if self.constraint == STRETCH else
            "max_length={}".format(self.max_length))

    def __validate(self):
        if not self.candidates:
            raise errors.DomainError("The set of candidate locations must not be empty")
        if any(not 0 <= u < self.network.node_count for u in self.candidates):
            raise errors.DomainError("Candidate locations must be nodes of the network", candidates=self.candidates)
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise errors.DomainError("Capacity must be a positive integer, got {}".format(self.capacity))
        self.capacity = int(self.capacity)
        if self.stretch < 1:
            raise errors.DomainError("Stretch must be at least 1, got {}".format(self.stretch))
        if self.constraint not in (STRETCH, LENGTH):
            raise errors.DomainError("Unknown route constraint {}".format(self.constraint))
        if self.constraint == LENGTH and (self.max_length is None or self.max_length < 0):
            raise errors.DomainError("The length constraint needs a nonnegative max_length")
        for index, pair in enumerate(self.pairs):
            if max(pair.s, pair.t) >= self.network.node_count:
                raise errors.DomainError("Pair {} refers to an unknown node".format(pair), pair_index=index)
            if not self.distances.reachable(pair.s, pair.t):
                raise errors.DomainError("Pair {} is not connected".format(pair), pair_index=index)

    def route_bound(self, pair):  # type: (Pair) -> float
        """
        :return: the largest admissible length of a route via a middlebox for the pair
        """
        if self.constraint == LENGTH:
            return self.max_length
        return self.stretch * self.distances[pair.s, pair.t]


def within_bound(route_length, bound):
    """
    Feasibility comparison shared by every route constraint, tolerant to rounding of irrational distances.
    Works elementwise on numpy arrays.
    """
    return route_length <= bound * (1.0 + FEASIBILITY_RTOL)


def is_feasible(u, pair, instance):  # type: (int, Pair, PlacementInstance) -> bool
    """
    Tells whether the pair may be routed via a middlebox at u, i.e. d(s, u) + d(u, t) is within the route bound.
    """
    d = instance.distances
    return bool(within_bound(d[pair.s, u] + d[u, pair.t], instance.route_bound(pair)))


class FeasibilitySets:
    """
    Both directions of the feasibility relation: for every candidate u the sorted pair indices it can serve, and
    for every pair the sorted candidates that can serve it. Usually obtained by :func:`build_feasibility`, but it
    can also be created directly from the candidate side::

        FeasibilitySets({0: [0, 1], 5: [1]}, pair_count=2)

    :ivar dict by_candidate: u -> sorted list of pair indices (S_u)
    :ivar list by_pair: pair index -> sorted list of candidates (C_p)
    :ivar list candidates: sorted candidates
    """

    def __init__(self, by_candidate, pair_count):  # type: (dict, int) -> None
        self.pair_count = pair_count
        self.candidates = sorted(by_candidate)
        self.by_candidate = {u: sorted(set(by_candidate[u])) for u in self.candidates}
        self.by_pair = [[] for _ in range(pair_count)]
        for u in self.candidates:
            for p in self.by_candidate[u]:
                assert 0 <= p < pair_count, "Pair index {} out of range at candidate {}".format(p, u)
                self.by_pair[p].append(u)

    def __eq__(self, other):
        return (isinstance(other, FeasibilitySets) and
                self.pair_count == other.pair_count and
                self.by_candidate == other.by_candidate)

    def __ne__(self, other):
        return not self == other

    def uncoverable(self):
        """
        :return: indices of pairs no candidate can serve
        """
        return [p for p, serving in enumerate(self.by_pair) if not serving]


def build_feasibility(instance, strict=True):  # type: (PlacementInstance, bool) -> FeasibilitySets
    """
    Precomputes the feasibility sets of an instance from its distance matrix.

    :param PlacementInstance instance: the instance
    :param bool strict: raise InfeasiblePair on the first pair no candidate can serve, otherwise leave it empty
    :return: FeasibilitySets
    """
    d = instance.distances.d
    sources = np.array([pair.s for pair in instance.pairs], dtype=np.int64)
    targets = np.array([pair.t for pair in instance.pairs], dtype=np.int64)
    if instance.constraint == LENGTH:
        bounds = np.full(len(instance.pairs), instance.max_length)
    else:
        bounds = instance.stretch * d[sources, targets]

    by_candidate = {}
    for u in instance.candidates:
        routes = d[sources, u] + d[u, targets]
        by_candidate[u] = np.flatnonzero(within_bound(routes, bounds)).tolist()

    sets = FeasibilitySets(by_candidate, len(instance.pairs))
    if strict:
        for p in sets.uncoverable():
            raise errors.InfeasiblePair(p, instance.pairs[p])
    logger.debug("Feasibility sets built: %d candidates, %d pair-candidate edges",
                 len(sets.candidates), sum(len(pairs) for pairs in sets.by_candidate.values()))
    return sets


def feasible_total_capacity_check(instance, sets):  # type: (PlacementInstance, FeasibilitySets) -> bool
    """
    Necessary (not sufficient) condition for the instance to be solvable: enough total capacity and no pair without
    a feasible candidate.

    :return: True when the check passes
    :raises Infeasible: with the uncoverable pairs and the capacity figures in its details
    """
    uncoverable = sets.uncoverable()
    total_capacity = instance.capacity * len(sets.candidates)
    if uncoverable or len(instance.pairs) > total_capacity:
        raise errors.Infeasible(
            "Instance cannot be served: {} pairs, total capacity {}, {} uncoverable pairs".format(
                len(instance.pairs), total_capacity, len(uncoverable)),
            pair_count=len(instance.pairs),
            total_capacity=total_capacity,
            uncoverable=[[instance.pairs[p].s, instance.pairs[p].t] for p in uncoverable]
        )
    return True
