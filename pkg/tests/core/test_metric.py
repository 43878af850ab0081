import math
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

import middlebox_placer.core as core
from middlebox_placer.core import errors
from middlebox_placer.core.metric import EARTH_RADIUS_KM, GEO, HOP_COUNT, geo_weighted
from tests import oracles


class TestGeoDistance(unittest.TestCase):
    def test_same_point(self):
        self.assertEqual(0.0, core.geo_distance((50.0, 14.0), (50.0, 14.0)))

    def test_quarter_meridian(self):
        self.assertAlmostEqual(math.pi * EARTH_RADIUS_KM / 2, core.geo_distance((0.0, 0.0), (90.0, 0.0)), places=6)

    def test_antipodes(self):
        self.assertAlmostEqual(math.pi * EARTH_RADIUS_KM, core.geo_distance((0.0, 0.0), (0.0, 180.0)), places=6)

    def test_prague_vienna(self):
        self.assertAlmostEqual(252.0, core.geo_distance((50.0755, 14.4378), (48.2082, 16.3738)), delta=2.0)

    def test_out_of_range(self):
        self.assertRaises(errors.DomainError, core.geo_distance, (91.0, 0.0), (0.0, 0.0))
        self.assertRaises(errors.DomainError, core.geo_distance, (0.0, 0.0), (0.0, -181.0))

    @given(st.floats(-90, 90), st.floats(-180, 180), st.floats(-90, 90), st.floats(-180, 180))
    @settings(max_examples=300)
    def test_matches_reference(self, lat1, lon1, lat2, lon2):
        expected = oracles.haversine((lat1, lon1), (lat2, lon2))
        self.assertAlmostEqual(expected, core.geo_distance((lat1, lon1), (lat2, lon2)), delta=1e-6 * (1 + expected))

    def test_missing_coordinates(self):
        network = core.Network(2, [(0, 1, 1.0)], coordinates=[(50.0, 14.0), None])
        with self.assertRaises(errors.GeoUnavailable) as context:
            geo_weighted(network)
        self.assertEqual([1], context.exception.details["nodes"])


class TestComputeApsp(unittest.TestCase):
    def setUp(self):
        self.network = core.Network(5, [(0, 1, 2.0), (1, 2, 2.0), (0, 2, 5.0), (2, 3, 1.0)])

    def tearDown(self):
        del self.network

    def test_edge_weight(self):
        d = core.compute_apsp(self.network)
        self.assertEqual(4.0, d[0, 2])
        self.assertEqual(5.0, d[0, 3])
        self.assertEqual(0.0, d[3, 3])

    def test_hop_count(self):
        d = core.compute_apsp(self.network, HOP_COUNT)
        self.assertEqual(1.0, d[0, 2])
        self.assertEqual(2.0, d[0, 3])

    def test_unreachable(self):
        d = core.compute_apsp(self.network)
        self.assertTrue(np.isinf(d[0, 4]))
        self.assertFalse(d.reachable(0, 4))
        self.assertTrue(d.reachable(4, 4))

    def test_read_only(self):
        d = core.compute_apsp(self.network)
        with self.assertRaises(ValueError):
            d.d[0, 1] = 7.0

    def test_zero_weight_edges(self):
        network = core.Network(4, [(0, 1, 0.0), (1, 2, 3.0), (2, 3, 0.0)])
        d = core.compute_apsp(network)
        self.assertEqual(0.0, d[0, 1])
        self.assertEqual(3.0, d[0, 3])
        self.assertEqual(3.0, d[1, 2])

    def test_geo(self):
        network = core.Network(2, [(0, 1, 99.0)], coordinates=[(0.0, 0.0), (90.0, 0.0)])
        self.assertAlmostEqual(math.pi * EARTH_RADIUS_KM / 2, core.compute_apsp(network, GEO)[0, 1], places=6)

    def test_geo_without_coordinates(self):
        self.assertRaises(errors.GeoUnavailable, core.compute_apsp, self.network, GEO)

    def test_unknown_metric(self):
        self.assertRaises(errors.DomainError, core.compute_apsp, self.network, "manhattan")

    def test_empty_network(self):
        self.assertRaises(errors.DomainError, core.compute_apsp, core.Network(0))

    def test_single_node(self):
        np.testing.assert_array_equal([[0.0]], core.compute_apsp(core.Network(1)).d)
        np.testing.assert_array_equal([[0.0]], core.compute_apsp(core.Network(1), HOP_COUNT).d)

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 15))
    @settings(max_examples=60, deadline=None)
    def test_relabelling_permutes_distances(self, seed, node_count):
        rng = np.random.default_rng(seed)
        network = oracles.random_network(rng, node_count)
        order = rng.permutation(node_count)
        relabelled = core.Network(node_count, [(int(order[u]), int(order[v]), weight)
                                               for u, v, weight in network.edges])
        d = core.compute_apsp(network).d
        np.testing.assert_array_equal(d, core.compute_apsp(relabelled).d[np.ix_(order, order)])

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 12), st.booleans())
    @settings(max_examples=100, deadline=None)
    def test_matches_floyd_warshall(self, seed, node_count, hop_count):
        network = oracles.random_network(np.random.default_rng(seed), node_count)
        metric = HOP_COUNT if hop_count else "edge-weight"
        np.testing.assert_allclose(oracles.floyd_warshall(network, hop_count), core.compute_apsp(network, metric).d)

    def test_symmetric_triangle_inequality(self):
        network = oracles.random_network(np.random.default_rng(7), 15)
        d = core.compute_apsp(network).d
        np.testing.assert_array_equal(d, d.T)
        self.assertTrue(np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9))


if __name__ == '__main__':
    unittest.main()
