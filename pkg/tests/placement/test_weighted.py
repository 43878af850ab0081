import fractions
import math
import os
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

import middlebox_placer.core as core
from middlebox_placer.core import errors
from middlebox_placer.core.classes import FeasibilitySets
from middlebox_placer.core.io_wrapper import generator, parser
from middlebox_placer.placement import oracle, report, weighted
from tests import oracles

Fraction = fractions.Fraction
DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
seeds = st.integers(0, 2 ** 32 - 1)


def path_network():
    network = core.Network(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    return network, core.compute_apsp(network)


def random_weighted(rng, candidate_count, request_count, exact=True):
    sets = oracles.random_sets(rng, candidate_count, request_count, density=0.5)
    if exact:
        units = int(rng.integers(2, 9))
        capacity = Fraction(units)
        demands = [Fraction(int(rng.integers(1, 2 * units + 1)), 2) for _ in range(request_count)]
    else:
        capacity = float(rng.uniform(2.0, 8.0))
        demands = rng.uniform(0.1, capacity, request_count).tolist()
    requests = [weighted.Request.pair(0, 1, demand) for demand in demands]
    return requests, sets, capacity, weighted.preprocess(requests, sets, capacity)


class TestRequest(unittest.TestCase):
    def test_factories(self):
        self.assertEqual("pair", weighted.Request.pair(4, 0, 1).kind)
        self.assertEqual((0, 4), weighted.Request.pair(4, 0, 1).nodes)
        self.assertEqual("pair", weighted.Request.group([3, 1, 3], 1).kind)
        self.assertEqual("group", weighted.Request.group([3, 1, 2], 1).kind)
        self.assertEqual([(1, 2), (1, 3), (2, 3)], weighted.Request.group([3, 1, 2], 1).member_pairs())

    def test_invalid(self):
        self.assertRaises(errors.DomainError, weighted.Request.pair, 1, 1, 1)
        self.assertRaises(errors.DomainError, weighted.Request.pair, 0, 1, 0)
        self.assertRaises(errors.DomainError, weighted.Request, weighted.PAIR, (0, 1, 2), 1)


class TestWeightedInstance(unittest.TestCase):
    def setUp(self):
        self.network, self.distances = path_network()
        self.group = weighted.Request.group([0, 1, 3], 1)

    def tearDown(self):
        del self.network
        del self.distances

    def instance(self, predicate):
        return weighted.WeightedInstance(self.network, self.distances, [self.group], 2, group_predicate=predicate)

    def test_all_pairs_predicate(self):
        instance = self.instance("all-pairs")
        self.assertEqual([False, True, False, False], [instance.is_feasible(u, self.group) for u in range(4)])

    def test_max_predicate(self):
        instance = self.instance("max")
        self.assertEqual([False, True, True, False], [instance.is_feasible(u, self.group) for u in range(4)])

    def test_sum_predicate(self):
        instance = self.instance("sum")
        self.assertEqual([False, True, False, False], [instance.is_feasible(u, self.group) for u in range(4)])

    def test_unknown_predicate(self):
        self.assertRaises(errors.DomainError, self.instance, "median")

    def test_invalid_capacity(self):
        self.assertRaises(errors.DomainError, weighted.WeightedInstance, self.network, self.distances, [], 0)

    def test_request_feasibility(self):
        instance = weighted.WeightedInstance(self.network, self.distances,
                                             [weighted.Request.pair(0, 2, 1), self.group], 2)
        sets = weighted.build_request_feasibility(instance)
        self.assertEqual({0: [0], 1: [0, 1], 2: [0], 3: []}, sets.by_candidate)


class TestPreprocess(unittest.TestCase):
    def test_capacity_boundary(self):
        requests = [weighted.Request.pair(0, 1, 2), weighted.Request.pair(0, 1, 2.0001)]
        sets = FeasibilitySets({0: [0, 1], 1: [1]}, pair_count=2)
        prepared = weighted.preprocess(requests, sets, 2)
        self.assertEqual([0], prepared.kept)
        self.assertEqual([1], prepared.rejected)
        self.assertEqual({0: [0], 1: []}, prepared.entries)
        self.assertEqual([(1, 0)], prepared.deleted)

    @given(seeds, st.integers(1, 6), st.integers(1, 10))
    @settings(max_examples=100, deadline=None)
    def test_entry_count(self, seed, candidate_count, request_count):
        requests, sets, capacity, prepared = random_weighted(np.random.default_rng(seed), candidate_count,
                                                             request_count)
        kept = set(prepared.kept)
        expected = sum(1 for u in sets.candidates for j in sets.by_candidate[u] if j in kept)
        self.assertEqual(expected, sum(len(entries) for entries in prepared.entries.values()))
        self.assertEqual(len(kept) * len(sets.candidates) - expected, len(prepared.deleted))


class TestFractional(unittest.TestCase):
    def test_one_request(self):
        prepared = weighted.preprocess([weighted.Request.pair(0, 1, 1)], FeasibilitySets({0: [0]}, 1), 3)
        fractional = weighted.solve_fractional([0], prepared)
        self.assertEqual(1, fractional.objective)
        self.assertEqual({(0, 0): 1}, fractional.x)
        self.assertTrue(fractional.is_integral())

    def test_capacity_forces_split(self):
        requests = [weighted.Request.pair(0, 1, 2), weighted.Request.pair(0, 1, 2)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0, 1]}, 2), 2)
        fractional = weighted.solve_fractional([0], prepared)
        self.assertEqual(1, fractional.objective)
        self.assertEqual(2, fractional.load(0))
        fractional.check()

    def test_empty_set(self):
        prepared = weighted.preprocess([weighted.Request.pair(0, 1, 1)], FeasibilitySets({0: [0]}, 1), 3)
        self.assertEqual(0, weighted.solve_fractional([], prepared).objective)

    def test_gain(self):
        requests = [weighted.Request.pair(0, 1, 1), weighted.Request.pair(0, 1, 1)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0], 1: [0, 1], 2: []}, 2), 1)
        self.assertEqual(0, weighted.gain(2, [], prepared))
        self.assertEqual(weighted.solve_fractional([1], prepared).objective, weighted.gain(1, [], prepared))
        self.assertEqual(1, weighted.gain(1, [0], prepared))

    @given(seeds, st.integers(2, 6), st.integers(1, 8))
    @settings(max_examples=150, deadline=None)
    def test_monotone_submodular(self, seed, candidate_count, request_count):
        rng = np.random.default_rng(seed)
        _, sets, _, prepared = random_weighted(rng, candidate_count, request_count)
        candidates = prepared.candidates
        outside = int(rng.choice(candidates))
        rest = [u for u in candidates if u != outside]
        small = [u for u in rest if rng.random() < 0.4]
        large = sorted(set(small) | {u for u in rest if rng.random() < 0.5})

        def f(subset):
            return weighted.solve_fractional(subset, prepared).objective

        self.assertLessEqual(f(small), f(large))
        self.assertGreaterEqual(f(small + [outside]) - f(small), f(large + [outside]) - f(large))


class TestGeneralizedGreedy(unittest.TestCase):
    def test_single_middlebox(self):
        requests = [weighted.Request.pair(0, 1, 1) for _ in range(3)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0], 1: [0, 1, 2]}, 3), 3)
        middleboxes, fractional = weighted.generalized_greedy(prepared)
        self.assertEqual([1], middleboxes)
        self.assertEqual(3, fractional.objective)

    def test_no_requests(self):
        prepared = weighted.preprocess([], FeasibilitySets({0: []}, 0), 3)
        middleboxes, fractional = weighted.generalized_greedy(prepared)
        self.assertEqual([], middleboxes)
        self.assertEqual(0, fractional.objective)

    def test_tie_break(self):
        prepared = weighted.preprocess([weighted.Request.pair(0, 1, 1)], FeasibilitySets({5: [0], 3: [0]}, 1), 1)
        self.assertEqual([3], weighted.generalized_greedy(prepared)[0])

    def test_infeasible(self):
        requests = [weighted.Request.pair(0, 1, 2) for _ in range(3)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0, 1, 2]}, 3), 2)
        with self.assertRaises(errors.Infeasible) as context:
            weighted.generalized_greedy(prepared)
        self.assertEqual(3, context.exception.details["requests"])

    def test_threshold_is_exact(self):
        prepared = weighted.preprocess([weighted.Request.pair(0, 1, 1)] * 2, FeasibilitySets({0: [0, 1]}, 2), 1)
        self.assertFalse(prepared.threshold_exceeded(Fraction(1)))
        self.assertTrue(prepared.threshold_exceeded(Fraction(1) + Fraction(1, 10 ** 12)))


class TestRounding(unittest.TestCase):
    def test_integral_input_unchanged(self):
        requests = [weighted.Request.pair(0, 1, 1) for _ in range(3)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0, 1], 1: [1, 2]}, 3), 2)
        fractional = weighted.FractionalAssignment([0, 1], {(0, 0): 1, (0, 1): 1, (1, 2): 1}, 3, prepared)
        rounded = weighted.round_solution(fractional, prepared)
        self.assertEqual({0: 0, 1: 0, 2: 1}, rounded.assignment)
        self.assertEqual({0: 2, 1: 1}, rounded.load)
        self.assertFalse(rounded.violates_capacity())

    def test_below_threshold(self):
        requests = [weighted.Request.pair(0, 1, 1) for _ in range(2)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0, 1]}, 2), 1)
        fractional = weighted.solve_fractional([0], prepared)
        self.assertRaises(errors.RoundingFailed, weighted.round_solution, fractional, prepared)

    def test_overload_within_twice_capacity(self):
        requests = [weighted.Request.pair(0, 1, Fraction(3, 2)) for _ in range(2)]
        prepared = weighted.preprocess(requests, FeasibilitySets({0: [0, 1]}, 2), 2)
        fractional = weighted.FractionalAssignment([0], {(0, 0): 1, (0, 1): Fraction(1, 3)}, Fraction(4, 3),
                                                   prepared)
        rounded = weighted.round_solution(fractional, prepared)
        self.assertEqual({0: 0, 1: 0}, rounded.assignment)
        self.assertEqual(Fraction(3, 2), rounded.max_relative_load())
        self.assertTrue(rounded.violates_capacity())

    @given(seeds, st.integers(1, 8), st.integers(1, 12), st.booleans())
    @settings(max_examples=250, deadline=None)
    def test_load_within_twice_capacity(self, seed, candidate_count, request_count, exact):
        _, sets, capacity, prepared = random_weighted(np.random.default_rng(seed), candidate_count, request_count,
                                                      exact)
        try:
            _, fractional = weighted.generalized_greedy(prepared)
        except errors.Infeasible:
            return
        rounded = weighted.round_solution(fractional, prepared)
        renumbered = {j: k for k, j in enumerate(prepared.kept)}
        self.assertEqual(sorted(prepared.kept), sorted(rounded.assignment))
        for j, u in rounded.assignment.items():
            self.assertIn(renumbered[j], prepared.entries[u])
        tolerance = 0 if exact else 1e-9
        for u in rounded.middleboxes:
            self.assertLessEqual(rounded.load[u], 2 * capacity + tolerance)

    @given(seeds, st.integers(1, 7), st.integers(1, 9))
    @settings(max_examples=120, deadline=None)
    def test_count_against_weighted_oracle(self, seed, candidate_count, request_count):
        requests, _, capacity, prepared = random_weighted(np.random.default_rng(seed), candidate_count,
                                                          request_count)
        kept = [requests[j] for j in prepared.kept]
        sets = FeasibilitySets(prepared.entries, prepared.request_count)
        try:
            exact = oracle.exact_weighted_min_middleboxes(kept, sets, capacity)
        except errors.Infeasible:
            return
        # an integral assignment is a fractional one
        self.assertEqual(prepared.request_count, weighted.solve_fractional(exact.middleboxes, prepared).objective)
        middleboxes, _ = weighted.generalized_greedy(prepared)
        n = prepared.request_count
        self.assertLessEqual(len(middleboxes), (1 + math.log(n)) * exact.optimum + 1e-9 if n else 0)


class TestSolveWeighted(unittest.TestCase):
    def test_sndlib_instance(self):
        with open(os.path.join(DATA, "triangle.sndlib"), "rb") as f:
            sndlib = parser.parse_sndlib(f.read())
        for replication in range(5):
            config = generator.ScenarioConfig(os.path.join(DATA, "triangle.sndlib"), stretch=1.5,
                                              replication=replication)
            instance = generator.weighted_instance(config, sndlib)
            prepared, fractional, rounded = weighted.solve_weighted(instance)
            loads = report.validate_weighted(instance, prepared, rounded)
            self.assertTrue(all(load <= 2 * instance.capacity for load in loads.values()))
            self.assertTrue(prepared.threshold_exceeded(fractional.objective))

    def test_group_requests(self):
        network, distances = path_network()
        requests = [weighted.Request.group([0, 1, 3], 2), weighted.Request.pair(2, 3, 1),
                    weighted.Request.pair(0, 2, 1)]
        instance = weighted.WeightedInstance(network, distances, requests, 3, candidates=[1, 2])
        prepared, _, rounded = weighted.solve_weighted(instance)
        self.assertEqual(1, rounded.assignment[0])
        report.validate_weighted(instance, prepared, rounded)


if __name__ == '__main__':
    unittest.main()
