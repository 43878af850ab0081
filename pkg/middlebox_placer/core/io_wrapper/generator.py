"""
Scenario generation and the instance JSON v1 writer. All randomness comes from numpy's PCG64 generator seeded with
``SeedSequence([seed, replication])``, so every replication of a scenario has its own reproducible stream.
"""
import fractions
import json
import logging
import math
import os

import numpy as np

from middlebox_placer.core import errors
from middlebox_placer.core.classes import Network, PlacementInstance
from middlebox_placer.core.io_wrapper import parser
from middlebox_placer.core.metric import EDGE_WEIGHT, GEO, compute_apsp
from middlebox_placer.placement.weighted import Request, WeightedInstance

logger = logging.getLogger(__name__)

STRETCH_GRID_START = 1.0
STRETCH_GRID_STEP = 0.05
STRETCH_GRID_SIZE = 31
KEEP_PROBABILITY = 0.5


def stretch_grid():
    """
    :return: the stretch values 1.00, 1.05, ..., 2.50
    """
    return [round(STRETCH_GRID_START + STRETCH_GRID_STEP * k, 2) for k in range(STRETCH_GRID_SIZE)]


def default_metric(network):
    return GEO if network.node_count and network.has_coordinates() else EDGE_WEIGHT


class ScenarioConfig:
    """
    Parameters of a random scenario. Identical configurations produce identical instances::

        ScenarioConfig(topology="Ulaknet.graphml", p=0.3, stretch=1.5, seed=42, replication=3)

    :param topology: Network or path of a topology file (see :func:`parser.read_topology`)
    :param float p: probability of every node pair to communicate, in (0, 1]
    :param float stretch: stretch of the generated instance
    :param int seed: 64 bit seed
    :param int replication: replication index, selects an independent random stream
    :param capacity: fixed capacity, None applies the scenario rule
    :param str metric: distance metric, None picks "geo" when all nodes have coordinates
    :param float keep_probability: probability of keeping an SNDlib demand in weighted scenarios
    :param str name: topology name recorded in the instance, the file name by default
    """

    def __init__(self, topology, p=0.3, stretch=1.0, seed=0, replication=0, capacity=None, metric=None,
                 keep_probability=KEEP_PROBABILITY, name=None):
        if not 0 < p <= 1:
            raise errors.DomainError("Pair probability must be in (0, 1], got {}".format(p))
        if not 0 < keep_probability <= 1:
            raise errors.DomainError("Keep probability must be in (0, 1], got {}".format(keep_probability))
        self.topology = topology
        self.p = p
        self.stretch = stretch
        self.seed = int(seed)
        self.replication = int(replication)
        self.capacity = capacity
        self.metric = metric
        self.keep_probability = keep_probability
        if name is None:
            name = os.path.splitext(os.path.basename(topology))[0] if isinstance(topology, str) else "network"
        self.name = name

    def __repr__(self):
        return "ScenarioConfig({}, p={}, stretch={}, seed={}, replication={})".format(
            self.name, self.p, self.stretch, self.seed, self.replication)

    def rng(self):  # type: () -> np.random.Generator
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.replication])))

    def network(self):  # type: () -> Network
        if isinstance(self.topology, Network):
            return self.topology
        return parser.read_topology(self.topology)

    def as_dict(self):
        return {
            "topology": self.name,
            "p": self.p,
            "stretch": self.stretch,
            "seed": self.seed,
            "replication": self.replication,
        }


def unweighted_capacity(node_count, p):
    """
    Capacity rule of the unweighted scenarios, ceil(2 (|V| - 1) p), evaluated on the decimal value of p.
    """
    return max(1, int(math.ceil(2 * (node_count - 1) * fractions.Fraction(str(p)))))


def weighted_capacity(node_count, total_demand):
    """
    Capacity rule of the weighted scenarios, 4 D / |V|.
    """
    if total_demand <= 0:
        return 1
    if isinstance(total_demand, (int, fractions.Fraction)):
        return fractions.Fraction(4 * total_demand, node_count)
    return 4.0 * total_demand / node_count


def generate_unweighted_scenario(config, network=None):  # type: (ScenarioConfig, Network) -> PlacementInstance
    """
    Every node pair communicates independently with probability p, every node is a candidate location and the
    capacity follows :func:`unweighted_capacity` unless fixed by the config. Pairs of disconnected nodes are dropped.

    :param ScenarioConfig config: the scenario
    :param Network network: already loaded topology of the config, loaded from config.topology when None
    :return: PlacementInstance
    """
    network = network if network is not None else config.network()
    metric = config.metric or default_metric(network)
    distances = compute_apsp(network, metric)
    sources, targets = np.triu_indices(network.node_count, k=1)
    chosen = config.rng().random(len(sources)) < config.p

    pairs = []
    dropped = 0
    for s, t in zip(sources[chosen].tolist(), targets[chosen].tolist()):
        if distances.reachable(s, t):
            pairs.append((s, t))
        else:
            dropped += 1
    if dropped:
        logger.warning("Dropped %d pairs of disconnected nodes", dropped)

    capacity = config.capacity if config.capacity is not None else unweighted_capacity(network.node_count, config.p)
    instance = PlacementInstance(network, distances, pairs, capacity, stretch=config.stretch, metric=metric)
    logger.info("Generated %r: %d pairs, capacity %d", config, len(pairs), capacity)
    return instance


def generate_weighted_scenario(config, sndlib):  # type: (ScenarioConfig, tuple) -> tuple
    """
    Keeps every demand of a parsed SNDlib instance independently with the keep probability of the config and sets
    the capacity to 4 D / |V|, D being the kept demand.

    :param ScenarioConfig config: the scenario
    :param tuple sndlib: (Network, demands) as returned by :func:`parser.parse_sndlib`
    :return: tuple (requests, capacity)
    """
    network, demands = sndlib
    kept = config.rng().random(len(demands)) < config.keep_probability
    requests = [Request.pair(s, t, value) for (s, t, value), keep in zip(demands, kept.tolist()) if keep]
    total = sum(request.demand for request in requests)
    if not requests:
        logger.warning("No demand of %s was kept", config.name)
    capacity = config.capacity if config.capacity is not None else weighted_capacity(network.node_count, total)
    logger.info("Generated %r: %d of %d demands kept, total %s, capacity %s", config, len(requests), len(demands),
                total, capacity)
    return requests, capacity


def weighted_instance(config, sndlib, group_predicate="all-pairs"):
    # type: (ScenarioConfig, tuple, str) -> WeightedInstance
    network, _ = sndlib
    requests, capacity = generate_weighted_scenario(config, sndlib)
    metric = config.metric or default_metric(network)
    return WeightedInstance(network, compute_apsp(network, metric), requests, capacity, stretch=config.stretch,
                            metric=metric, group_predicate=group_predicate)


def star_instance(pair_count, depth, stretch=None, capacity=None, candidates=None):
    """
    Star network where a single middlebox in the center serves everything: node 0 is the center, pair i joins the
    leaves 2i + 1 and 2i + 2, both at distance depth / 2 from the center, and the two leaves share a direct unit
    edge. Routing via the center has stretch exactly depth; with a smaller stretch every pair needs a middlebox of
    its own.

    :param int pair_count: number of pairs
    :param int depth: route length via the center, at least 2
    :param float stretch: depth by default
    :param int capacity: pair_count by default
    :param candidates: all nodes by default
    :return: PlacementInstance
    """
    if depth < 2:
        raise errors.DomainError("The star depth must be at least 2, got {}".format(depth))
    edges = []
    for i in range(pair_count):
        s, t = 2 * i + 1, 2 * i + 2
        edges.extend([(0, s, depth / 2.0), (0, t, depth / 2.0), (s, t, 1.0)])
    network = Network(2 * pair_count + 1, edges, labels=["center"] + ["{}{}".format(side, i) for i in range(
        pair_count) for side in ("s", "t")])
    return PlacementInstance(
        network=network,
        distances=compute_apsp(network),
        pairs=[(2 * i + 1, 2 * i + 2) for i in range(pair_count)],
        capacity=capacity if capacity is not None else max(1, pair_count),
        stretch=depth if stretch is None else stretch,
        candidates=candidates
    )


def set_cover_instance(element_count, subsets, capacity=None):
    """
    Placement instance equivalent to a set cover problem: element v becomes the pair of nodes v and
    element_count + v, subset i becomes the candidate node 2 element_count + i adjacent to both nodes of each of
    its elements, and the stretch is 1. Every element must belong to some subset.

    :param int element_count: number of elements
    :param list subsets: iterables of element indices
    :param int capacity: element_count by default, i.e. no capacity limit
    :return: PlacementInstance whose optimum equals the minimum set cover size
    """
    first_set = 2 * element_count
    edges = []
    for i, subset in enumerate(subsets):
        for v in set(subset):
            if not 0 <= v < element_count:
                raise errors.DomainError("Element {} is out of range".format(v))
            edges.extend([(v, first_set + i, 1.0), (first_set + i, element_count + v, 1.0)])
    network = Network(first_set + len(subsets), edges)
    return PlacementInstance(
        network=network,
        distances=compute_apsp(network),
        pairs=[(v, element_count + v) for v in range(element_count)],
        capacity=capacity if capacity is not None else max(1, element_count),
        stretch=1.0,
        candidates=range(first_set, first_set + len(subsets))
    )


def encode_number(value):
    if isinstance(value, fractions.Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, (np.integer, np.floating)):
        return value.item()
    return value


def network_to_dict(network):  # type: (Network) -> dict
    nodes = []
    for node in range(network.node_count):
        coordinate = network.coordinates[node]
        nodes.append({
            "id": node,
            "label": network.labels[node],
            "latitude": None if coordinate is None else coordinate[0],
            "longitude": None if coordinate is None else coordinate[1],
        })
    return {"nodes": nodes, "edges": [[u, v, weight] for u, v, weight in network.edges]}


def instance_to_dict(instance, scenario=None):
    """
    The instance JSON v1 document as a dict with the field order of the format reference.

    :param instance: PlacementInstance or WeightedInstance
    :param ScenarioConfig scenario: recorded as provenance when given
    """
    document = {
        "format": parser.INSTANCE_FORMAT,
        "version": parser.INSTANCE_VERSION,
        "metric": instance.metric,
        "constraint": instance.constraint,
        "stretch": instance.stretch,
        "max_length": instance.max_length,
        "capacity": encode_number(instance.capacity),
        "candidates": list(instance.candidates),
    }
    document.update(network_to_dict(instance.network))
    if isinstance(instance, WeightedInstance):
        document["group_predicate"] = instance.group_predicate
        document["requests"] = [{"nodes": list(request.nodes), "demand": encode_number(request.demand)}
                                for request in instance.requests]
    else:
        document["pairs"] = [[pair.s, pair.t] for pair in instance.pairs]
    if scenario is not None:
        document["scenario"] = scenario.as_dict()
    return document


def write_instance(instance, scenario=None):  # type: (..., ScenarioConfig) -> str
    """
    Serializes an instance as instance JSON v1. The output is byte for byte reproducible.
    """
    return json.dumps(instance_to_dict(instance, scenario), indent=2) + "\n"

