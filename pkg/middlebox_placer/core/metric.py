"""
Shortest path metric of a network. Distances come from one Dijkstra run per source node
(scipy.sparse.csgraph), which suits the sparse ISP topologies this package is used with.
"""
import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from middlebox_placer.core import errors
from middlebox_placer.core.classes import DistanceMatrix

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0

EDGE_WEIGHT = "edge-weight"
HOP_COUNT = "hop-count"
GEO = "geo"
METRICS = (EDGE_WEIGHT, HOP_COUNT, GEO)


def geo_distance(first, second):
    """
    Great circle distance between two points given as (latitude, longitude) in degrees, using the haversine
    formula on a sphere of radius 6371 km.

    :param tuple first: (latitude, longitude) of the first point
    :param tuple second: (latitude, longitude) of the second point
    :return float: distance in kilometers
    """
    for latitude, longitude in (first, second):
        if not (-90.0 <= latitude <= 90.0 and -180.0 <= longitude <= 180.0):
            raise errors.DomainError("Coordinates ({}, {}) are out of range".format(latitude, longitude),
                                     latitude=latitude, longitude=longitude)
    phi1, lambda1 = np.radians(first)
    phi2, lambda2 = np.radians(second)
    h = np.sin((phi2 - phi1) / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin((lambda2 - lambda1) / 2.0) ** 2
    return float(2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(min(1.0, h))))


def geo_weighted(network):
    """
    Returns a copy of the network whose edge weights are the great circle distances between the endpoints.
    """
    if not network.has_coordinates():
        missing = [node for node, coordinate in enumerate(network.coordinates) if coordinate is None]
        raise errors.GeoUnavailable("Nodes {} lack coordinates".format(missing), nodes=missing)
    return network.with_weights(lambda u, v, _: geo_distance(network.coordinates[u], network.coordinates[v]))


def compute_apsp(network, metric=EDGE_WEIGHT):
    """
    All pairs shortest paths of the network under the chosen metric::

        compute_apsp(network, "geo")[0, 5]  # kilometers on the shortest route from node 0 to node 5

    :param Network network: a nonempty network
    :param str metric: "edge-weight", "hop-count" (every edge counts 1) or "geo" (great circle edge lengths)
    :return DistanceMatrix: distances, ``inf`` for disconnected node pairs
    """
    if network.node_count == 0:
        raise errors.DomainError("Cannot compute distances of an empty network")
    if metric not in METRICS:
        raise errors.DomainError("Unknown metric {}, choose one of {}".format(metric, ", ".join(METRICS)))

    if metric == GEO:
        network = geo_weighted(network)

    n = network.node_count
    edges = network.edges
    rows = np.array([u for u, _, _ in edges], dtype=np.int64)
    cols = np.array([v for _, v, _ in edges], dtype=np.int64)
    if metric == HOP_COUNT:
        weights = np.ones(len(edges))
    else:
        weights = np.array([weight for _, _, weight in edges], dtype=np.float64)

    # csgraph treats explicit zeros as missing edges, the zero weight edges are bridged with a tiny weight and
    # the exact distances recomputed below
    zero = weights == 0
    graph = csr_matrix((np.where(zero, np.finfo(np.float64).tiny, weights), (rows, cols)), shape=(n, n))
    d = dijkstra(graph, directed=False)
    if zero.any():
        d = _exact_zero_weight_distances(n, rows, cols, weights, d)

    np.fill_diagonal(d, 0.0)
    logger.debug("Computed %s distances for %d nodes", metric, n)
    return DistanceMatrix(d)


def _exact_zero_weight_distances(n, rows, cols, weights, approx):
    # contract zero weight components, then the tiny bridging weights vanish from the result
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, weight in zip(rows, cols, weights):
        if weight == 0:
            parent[find(u)] = find(v)
    roots = sorted({find(x) for x in range(n)})
    index = {root: i for i, root in enumerate(roots)}
    component = np.array([index[find(x)] for x in range(n)], dtype=np.int64)
    lightest = {}
    for u, v, weight in zip(component[rows], component[cols], weights):
        if u != v:
            key = (min(u, v), max(u, v))
            lightest[key] = min(weight, lightest.get(key, weight))
    size = len(roots)
    graph = csr_matrix(
        ([weight for weight in lightest.values()],
         ([u for u, _ in lightest], [v for _, v in lightest])),
        shape=(size, size)
    )
    contracted = dijkstra(graph, directed=False)
    np.fill_diagonal(contracted, 0.0)
    d = contracted[np.ix_(component, component)]
    assert np.array_equal(np.isfinite(d), np.isfinite(approx)), "Contraction changed connectivity"
    return d
