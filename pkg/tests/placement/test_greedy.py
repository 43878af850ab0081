import math
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

import middlebox_placer.core as core
from middlebox_placer.core import errors
from middlebox_placer.core.classes import FeasibilitySets
from middlebox_placer.core.io_wrapper import generator
from middlebox_placer.placement import greedy, matching, oracle
from tests import oracles

seeds = st.integers(0, 2 ** 32 - 1)


class FakeInstance:
    def __init__(self, capacity):
        self.capacity = capacity


def restricted_instance(rng, node_count, candidate_count, stretch, capacity):
    base = oracles.random_instance(rng, node_count=node_count, capacity=capacity, stretch=stretch)
    candidates = rng.choice(node_count, size=min(candidate_count, node_count), replace=False).tolist()
    return core.PlacementInstance(base.network, base.distances, base.pairs, capacity, stretch=stretch,
                                  candidates=candidates)


class TestGreedyPlace(unittest.TestCase):
    def setUp(self):
        self.sets = FeasibilitySets({0: [0, 1, 2], 1: [2, 3], 2: [1, 3, 4]}, pair_count=5)

    def tearDown(self):
        del self.sets

    def test_trace(self):
        trace = greedy.greedy_place(FakeInstance(2), self.sets)
        self.assertEqual([0, 1, 2], trace.middleboxes)
        self.assertEqual([0, 2, 4, 5], trace.phi_series())
        self.assertEqual([(1, 0, 2, 2), (2, 1, 4, 2), (3, 2, 5, 1)], [step.as_row() for step in trace.steps])
        self.assertTrue(trace.complete)

    def test_layered_strategy_same_trace(self):
        bfs = greedy.greedy_place(FakeInstance(2), self.sets)
        layered = greedy.greedy_place(FakeInstance(2), self.sets, strategy=matching.LAYERED)
        self.assertEqual(bfs.steps, layered.steps)

    def test_tie_break_smallest_id(self):
        sets = FeasibilitySets({4: [0], 2: [0], 7: [0]}, pair_count=1)
        self.assertEqual([2], greedy.greedy_place(FakeInstance(1), sets).middleboxes)

    def test_no_pairs(self):
        trace = greedy.greedy_place(FakeInstance(3), FeasibilitySets({0: [], 1: []}, pair_count=0))
        self.assertEqual([], trace.middleboxes)
        self.assertEqual([0], trace.phi_series())

    def test_stalled(self):
        sets = FeasibilitySets({0: [0, 1], 1: [1]}, pair_count=3)
        with self.assertRaises(errors.Stalled) as context:
            greedy.greedy_place(FakeInstance(2), sets)
        self.assertEqual([2], context.exception.details["free_pairs"])
        self.assertEqual(2, context.exception.exit_code)

    def test_capacity_exhausted(self):
        sets = FeasibilitySets({0: [0, 1, 2]}, pair_count=3)
        self.assertRaises(errors.Stalled, greedy.greedy_place, FakeInstance(2), sets)

    def test_path_example(self):
        network = core.Network(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        instance = core.PlacementInstance(network, core.compute_apsp(network), [(0, 2), (1, 3), (0, 3)], 2)
        trace = greedy.greedy_place(instance, core.build_feasibility(instance))
        self.assertEqual([0, 1], trace.middleboxes)
        self.assertEqual({0: 0, 1: 1, 2: 0}, trace.state.as_dict())

    def test_star_single_center(self):
        instance = generator.star_instance(pair_count=12, depth=4)
        trace = greedy.greedy_place(instance, core.build_feasibility(instance))
        self.assertEqual([0], trace.middleboxes)

    def test_star_below_depth(self):
        instance = generator.star_instance(pair_count=12, depth=4, stretch=3.0)
        trace = greedy.greedy_place(instance, core.build_feasibility(instance))
        self.assertEqual(12, len(trace.middleboxes))
        self.assertNotIn(0, trace.middleboxes)


class TestIncrementalExtend(unittest.TestCase):
    def setUp(self):
        self.sets = FeasibilitySets({0: [0, 1, 2], 1: [2, 3], 2: [1, 3, 4]}, pair_count=5)
        self.start = greedy.GreedyTrace.start(self.sets, 2)

    def tearDown(self):
        del self.sets
        del self.start

    def test_budget(self):
        partial = greedy.incremental_extend(self.start, budget=1)
        self.assertEqual([0], partial.middleboxes)
        self.assertFalse(partial.complete)
        self.assertEqual([], self.start.middleboxes)

    def test_extension_equals_full_run(self):
        partial = greedy.incremental_extend(self.start, budget=2)
        full = greedy.incremental_extend(partial)
        self.assertEqual(greedy.incremental_extend(self.start).steps, full.steps)
        self.assertEqual([0, 1], partial.middleboxes)

    def test_invalid_budget(self):
        self.assertRaises(errors.DomainError, greedy.incremental_extend, self.start, 0)

    def test_prefix(self):
        self.assertEqual([0, 1], greedy.incremental_extend(self.start).prefix(2))

    def test_extend_complete_trace(self):
        full = greedy.incremental_extend(self.start)
        self.assertEqual(full.steps, greedy.incremental_extend(full, budget=3).steps)


class TestGreedyProperties(unittest.TestCase):
    @given(seeds, st.integers(2, 8), st.integers(1, 12), st.integers(1, 4))
    @settings(max_examples=300, deadline=None)
    def test_monotone_and_projection(self, seed, candidate_count, pair_count, capacity):
        sets = oracles.random_sets(np.random.default_rng(seed), candidate_count, pair_count)
        try:
            trace = greedy.greedy_place(FakeInstance(capacity), sets)
        except errors.Stalled:
            self.assertIsNone(oracles.exhaustive_min_middleboxes(sets, capacity))
            return
        series = trace.phi_series()
        self.assertTrue(all(a < b for a, b in zip(series, series[1:])))
        gains = [step.gain for step in trace.steps]
        self.assertTrue(all(a >= b for a, b in zip(gains, gains[1:])))
        trace.state.check()
        # loads of earlier middleboxes never change, so every prefix keeps serving what it served
        for k in range(len(trace.steps) + 1):
            self.assertEqual(series[k], trace.state.restricted_count(trace.prefix(k)))
            self.assertEqual(series[k], matching.phi(trace.prefix(k), sets, capacity))

    @given(seeds, st.integers(2, 8), st.integers(1, 10), st.integers(1, 4))
    @settings(max_examples=150, deadline=None)
    def test_within_wolsey_bound(self, seed, candidate_count, pair_count, capacity):
        sets = oracles.random_sets(np.random.default_rng(seed), candidate_count, pair_count, density=0.5)
        optimum = oracles.exhaustive_min_middleboxes(sets, capacity)
        if optimum is None:
            return
        count = len(greedy.greedy_place(FakeInstance(capacity), sets).middleboxes)
        self.assertLessEqual(optimum, count)
        self.assertLessEqual(count, (1 + math.log(min(capacity, pair_count))) * optimum + 1e-9)

    @given(seeds)
    @settings(max_examples=100, deadline=None)
    def test_random_instances(self, seed):
        instance = oracles.random_instance(np.random.default_rng(seed))
        sets = core.build_feasibility(instance)
        try:
            trace = greedy.greedy_place(instance, sets)
        except errors.Stalled:
            return
        for p, m in trace.state.as_dict().items():
            self.assertTrue(core.is_feasible(m, instance.pairs[p], instance))

    @given(seeds, st.integers(4, 15), st.integers(2, 10), st.sampled_from([1.0, 1.5, 2.0]), st.integers(1, 4))
    @settings(max_examples=200, deadline=None)
    def test_submodular_on_networks(self, seed, node_count, candidate_count, stretch, capacity):
        rng = np.random.default_rng(seed)
        instance = restricted_instance(rng, node_count, candidate_count, stretch, capacity)
        sets = core.build_feasibility(instance, strict=False)
        outside = int(rng.choice(instance.candidates))
        rest = [u for u in instance.candidates if u != outside]
        small = [u for u in rest if rng.random() < 0.4]
        large = sorted(set(small) | {u for u in rest if rng.random() < 0.5})

        def gain(base):
            return matching.phi(base + [outside], sets, capacity) - matching.phi(base, sets, capacity)

        self.assertGreaterEqual(gain(small), gain(large))
        self.assertLessEqual(matching.phi(small, sets, capacity), matching.phi(large, sets, capacity))

    @given(seeds, st.integers(5, 15), st.integers(2, 14), st.sampled_from([1.0, 1.5, 2.0]), st.integers(2, 6))
    @settings(max_examples=40, deadline=None)
    def test_within_wolsey_bound_on_networks(self, seed, node_count, candidate_count, stretch, capacity):
        instance = restricted_instance(np.random.default_rng(seed), node_count, candidate_count, stretch, capacity)
        sets = core.build_feasibility(instance, strict=False)
        try:
            trace = greedy.greedy_place(instance, sets)
        except errors.Stalled:
            self.assertRaises(errors.Infeasible, oracle.exact_min_middleboxes, instance, sets)
            return
        optimum = oracle.exact_min_middleboxes(instance, sets).optimum
        count = len(trace.middleboxes)
        self.assertLessEqual(optimum, count)
        self.assertLessEqual(count, (1 + math.log(min(capacity, len(instance.pairs)))) * optimum + 1e-9)


if __name__ == '__main__':
    unittest.main()
