"""
Maximum profit flow on the request/middlebox network, solved by successive shortest augmenting paths with node
potentials. Arithmetic is generic: with int or Fraction input every quantity stays an exact Fraction, with float
input reduced costs are clamped at zero to absorb rounding.
"""
import fractions
import heapq
import itertools
import logging

logger = logging.getLogger(__name__)


def is_exact(*values):
    return all(isinstance(value, (int, fractions.Fraction)) and not isinstance(value, bool) for value in values)


class ResidualNetwork:
    """
    Residual network with paired arcs: arc e and e ^ 1 are the two directions of the same edge.
    """

    def __init__(self, node_count, zero):
        self.zero = zero
        self.adjacency = [[] for _ in range(node_count)]
        self.head = []
        self.residual = []
        self.cost = []

    def add_arc(self, tail, head, capacity, cost):
        index = len(self.head)
        self.head.extend((head, tail))
        self.residual.extend((capacity, self.zero))
        self.cost.extend((cost, -cost))
        self.adjacency[tail].append(index)
        self.adjacency[head].append(index + 1)
        return index

    def flow(self, arc):
        return self.residual[arc ^ 1]


class ProfitFlow:
    """
    Flow network source -> request j (capacity p_j, profit 1/p_j per unit) -> candidate i (for every admissible
    entry) -> sink (capacity kappa). The maximum profit equals the optimum of the fractional assignment LP through
    the substitution y_ij = p_j * x_ij.

    :param list demands: p_j per request, positive
    :param capacity: kappa of every candidate
    :param candidates: candidate identifiers
    :param entries: admissible (candidate, request index) entries
    """

    def __init__(self, demands, capacity, candidates, entries):
        self.exact = is_exact(capacity, *demands)
        convert = fractions.Fraction if self.exact else float
        self.zero = convert(0)
        self.demands = [convert(p) for p in demands]
        self.capacity = convert(capacity)
        self.candidates = list(candidates)

        requests = len(self.demands)
        self.source = 0
        self.sink = requests + len(self.candidates) + 1
        self.network = ResidualNetwork(self.sink + 1, self.zero)
        candidate_node = {u: requests + 1 + k for k, u in enumerate(self.candidates)}

        self.request_arcs = [self.network.add_arc(self.source, j + 1, p, -1 / p) for j, p in enumerate(self.demands)]
        self.entry_arcs = {}
        for u, j in sorted(entries):
            self.entry_arcs[(u, j)] = self.network.add_arc(j + 1, candidate_node[u], self.demands[j], self.zero)
        for u in self.candidates:
            self.network.add_arc(candidate_node[u], self.sink, self.capacity, self.zero)

    def __initial_potentials(self):
        # the network is layered source -> requests -> candidates -> sink, so one pass per layer is exact
        network = self.network
        potential = [self.zero] * len(network.adjacency)
        reached = [False] * len(network.adjacency)
        reached[self.source] = True
        layers = [[self.source], range(1, len(self.demands) + 1),
                  range(len(self.demands) + 1, self.sink), [self.sink]]
        for layer in layers[:-1]:
            for tail in layer:
                if not reached[tail]:
                    continue
                for arc in network.adjacency[tail]:
                    if arc % 2 == 1 or network.residual[arc] == 0:
                        continue
                    head = network.head[arc]
                    candidate = potential[tail] + network.cost[arc]
                    if not reached[head] or candidate < potential[head]:
                        potential[head] = candidate
                        reached[head] = True
        return potential

    def __shortest_paths(self, potential):
        network = self.network
        distance = {self.source: self.zero}
        via = {}
        done = set()
        counter = itertools.count()
        heap = [(self.zero, next(counter), self.source)]
        while heap:
            dist, _, tail = heapq.heappop(heap)
            if tail in done:
                continue
            done.add(tail)
            for arc in network.adjacency[tail]:
                if network.residual[arc] <= 0:
                    continue
                head = network.head[arc]
                if head in done:
                    continue
                reduced = network.cost[arc] + potential[tail] - potential[head]
                if not self.exact and reduced < 0:
                    reduced = self.zero
                assert reduced >= 0, "Negative reduced cost {} on arc {}".format(reduced, arc)
                candidate = dist + reduced
                if head not in distance or candidate < distance[head]:
                    distance[head] = candidate
                    via[head] = arc
                    heapq.heappush(heap, (candidate, next(counter), head))
        return distance, via

    def solve(self):
        """
        :return: tuple (profit, flows) where flows maps (candidate, request index) to the flow y on that entry
        """
        network = self.network
        potential = self.__initial_potentials()
        augmentations = 0
        while True:
            distance, via = self.__shortest_paths(potential)
            if self.sink not in distance:
                break
            path_cost = distance[self.sink] - potential[self.source] + potential[self.sink]
            if path_cost >= 0 or (not self.exact and path_cost > -1e-12):
                break
            for node, dist in distance.items():
                potential[node] += dist

            arcs = []
            node = self.sink
            while node != self.source:
                arc = via[node]
                arcs.append(arc)
                node = network.head[arc ^ 1]
            amount = min(network.residual[arc] for arc in arcs)
            for arc in arcs:
                network.residual[arc] -= amount
                network.residual[arc ^ 1] += amount
            augmentations += 1

        profit = sum((network.flow(arc) / p for arc, p in zip(self.request_arcs, self.demands)), self.zero)
        flows = {entry: network.flow(arc) for entry, arc in self.entry_arcs.items() if network.flow(arc) > 0}
        logger.debug("Profit flow solved with %d augmentations, profit %s", augmentations, profit)
        return profit, flows
