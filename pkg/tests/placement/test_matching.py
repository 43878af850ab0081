import itertools
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from middlebox_placer.core import errors
from middlebox_placer.core.classes import FeasibilitySets
from middlebox_placer.placement import matching
from tests import oracles

seeds = st.integers(0, 2 ** 32 - 1)


class TestAssignment(unittest.TestCase):
    def setUp(self):
        # three candidates, five pairs, capacity 2
        self.sets = FeasibilitySets({0: [0, 1, 2], 1: [2, 3], 2: [1, 3, 4]}, pair_count=5)

    def tearDown(self):
        del self.sets

    def test_add_middlebox(self):
        state = matching.Assignment(self.sets, 2)
        _, gained = matching.add_middlebox(state, 0)
        self.assertEqual(2, gained)
        self.assertEqual([0, 0, None, None, None], state.owner)
        _, gained = matching.add_middlebox(state, 2)
        self.assertEqual(2, gained)
        state.check()
        self.assertEqual(4, state.assigned_count)

    def test_augmenting_hands_over_pairs(self):
        state = matching.Assignment(self.sets, 2)
        matching.add_middlebox(state, 0)
        matching.add_middlebox(state, 2)
        served_before = state.assigned_pairs()
        _, gained = matching.add_middlebox(state, 1)
        self.assertEqual(1, gained)
        self.assertTrue(served_before <= state.assigned_pairs())
        self.assertEqual(5, state.assigned_count)
        state.check()

    def test_already_active(self):
        state = matching.Assignment(self.sets, 2)
        matching.add_middlebox(state, 0)
        self.assertRaises(errors.AlreadyActive, matching.add_middlebox, state, 0)

    def test_not_a_candidate(self):
        self.assertRaises(errors.DomainError, matching.add_middlebox, matching.Assignment(self.sets, 2), 7)

    def test_unknown_strategy(self):
        self.assertRaises(errors.DomainError, matching.add_middlebox, matching.Assignment(self.sets, 2), 0, "dfs")

    def test_copy_is_independent(self):
        state = matching.Assignment(self.sets, 2)
        matching.add_middlebox(state, 0)
        snapshot = state.copy()
        matching.add_middlebox(snapshot, 1)
        self.assertEqual([0], state.active)
        self.assertEqual(2, state.assigned_count)

    def test_marginal_gain_leaves_state(self):
        state = matching.Assignment(self.sets, 2)
        matching.add_middlebox(state, 0)
        owner = list(state.owner)
        self.assertEqual(2, matching.marginal_gain(state, 2))
        self.assertEqual(owner, state.owner)
        self.assertFalse(state.is_active(2))

    def test_phi(self):
        self.assertEqual(0, matching.phi([], self.sets, 2))
        self.assertEqual(2, matching.phi([1], self.sets, 2))
        self.assertEqual(5, matching.phi([0, 1, 2], self.sets, 2))

    def test_restricted_count(self):
        state = matching.new_assignment(self.sets, 2, [0, 1, 2])
        self.assertEqual(state.assigned_count, state.restricted_count([0, 1, 2]))
        self.assertEqual(len(state.served_by(0)), state.restricted_count([0]))


class TestAugmentingPath(unittest.TestCase):
    def setUp(self):
        self.sets = FeasibilitySets({0: [0, 1], 1: [0]}, pair_count=2)
        self.state = matching.Assignment(self.sets, 1)
        matching.add_middlebox(self.state, 1)
        matching.activate(self.state, 0)

    def tearDown(self):
        del self.state
        del self.sets

    def test_shortest_path(self):
        path = matching.find_augmenting_path(self.state, 0)
        self.assertEqual(matching.AugmentingPath([0], [1]), path)
        self.assertEqual(1, len(path))

    def test_invalid_path(self):
        # pair 0 is assigned to middlebox 1, it cannot end a path
        self.assertRaises(errors.InvalidPath, matching.apply_augmenting_path, self.state,
                          matching.AugmentingPath([0], [0]))

    def test_no_capacity(self):
        self.state.load[0] = 1
        self.assertIsNone(matching.find_augmenting_path(self.state, 0))

    def test_long_path(self):
        sets = FeasibilitySets({0: [0], 1: [0, 1], 2: [1, 2]}, pair_count=3)
        state = matching.Assignment(sets, 1)
        matching.add_middlebox(state, 1)
        matching.add_middlebox(state, 2)
        self.assertEqual([1, 2, None], state.owner)
        matching.activate(state, 0)
        path = matching.find_augmenting_path(state, 0)
        self.assertEqual(matching.AugmentingPath([0, 1, 2], [0, 1, 2]), path)
        matching.apply_augmenting_path(state, path)
        self.assertEqual([0, 1, 2], state.owner)
        self.assertEqual({0: 1, 1: 1, 2: 1}, state.load)


class TestMatchingProperties(unittest.TestCase):
    @given(seeds, st.integers(2, 7), st.integers(1, 10), st.integers(1, 4))
    @settings(max_examples=500, deadline=None)
    def test_phi_equals_max_flow(self, seed, candidate_count, pair_count, capacity):
        rng = np.random.default_rng(seed)
        sets = oracles.random_sets(rng, candidate_count, pair_count)
        subset = [u for u in sets.candidates if rng.random() < 0.6]
        self.assertEqual(oracles.max_flow_phi(sets, capacity, subset), matching.phi(subset, sets, capacity))

    @given(seeds, st.integers(2, 7), st.integers(1, 10), st.integers(1, 4))
    @settings(max_examples=300, deadline=None)
    def test_layered_matches_bfs(self, seed, candidate_count, pair_count, capacity):
        rng = np.random.default_rng(seed)
        sets = oracles.random_sets(rng, candidate_count, pair_count)
        bfs = matching.Assignment(sets, capacity)
        layered = matching.Assignment(sets, capacity)
        for m in rng.permutation(sets.candidates).tolist():
            served = bfs.assigned_pairs()
            _, bfs_gain = matching.add_middlebox(bfs, m, matching.BFS)
            _, layered_gain = matching.add_middlebox(layered, m, matching.LAYERED)
            self.assertEqual(bfs_gain, layered_gain)
            self.assertTrue(served <= bfs.assigned_pairs())
            bfs.check()
            layered.check()

    @given(seeds, st.integers(2, 6), st.integers(1, 9), st.integers(1, 4))
    @settings(max_examples=1000, deadline=None)
    def test_submodular(self, seed, candidate_count, pair_count, capacity):
        rng = np.random.default_rng(seed)
        sets = oracles.random_sets(rng, candidate_count, pair_count)
        candidates = sets.candidates
        outside = int(rng.choice(candidates))
        rest = [u for u in candidates if u != outside]
        small = [u for u in rest if rng.random() < 0.4]
        large = sorted(set(small) | {u for u in rest if rng.random() < 0.5})

        def gain(base):
            return matching.phi(base + [outside], sets, capacity) - matching.phi(base, sets, capacity)

        self.assertGreaterEqual(gain(small), gain(large))
        self.assertLessEqual(matching.phi(small, sets, capacity), matching.phi(large, sets, capacity))

    def test_submodular_exhaustive_small(self):
        sets = FeasibilitySets({0: [0, 1, 2], 1: [2, 3], 2: [1, 3, 4], 3: [0, 4]}, pair_count=5)
        for capacity in (1, 2, 3):
            value = {subset: matching.phi(subset, sets, capacity)
                     for k in range(5) for subset in itertools.combinations(range(4), k)}
            for a, b in itertools.combinations(value, 2):
                union = tuple(sorted(set(a) | set(b)))
                intersection = tuple(sorted(set(a) & set(b)))
                self.assertLessEqual(value[union] + value[intersection], value[a] + value[b])


if __name__ == '__main__':
    unittest.main()
