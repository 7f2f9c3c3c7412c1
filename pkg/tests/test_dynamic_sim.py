# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Dynamic graph sampling and flooding simulation tests."""
import math
import unittest

import networkx as nx
import numpy as np

from epidtn.common.exceptions import ParameterError
from epidtn.model.delivery import DeliveryQuery, delivery_ratio
from epidtn.model.edge_markov import EdgeMarkovParams
from epidtn.sim.dynamic_graph import (
    DynamicGraph,
    edge_endpoints,
    edge_id,
    sample_graph,
    step_edge_states,
)
from epidtn.sim.flooding import (
    SimConfig,
    SimEstimate,
    estimate_delivery,
    flood,
    flood_pairs,
    propagate,
    random_pairs,
)

_DEFAULTS = EdgeMarkovParams(p_up=0.05, p_down=0.5)


def _sigma(prob: float, runs: int) -> float:
    return math.sqrt(prob * (1 - prob) / runs)


class TestDynamicGraph(unittest.TestCase):
    """Unit test class."""

    def test_edge_ids(self):
        rows, cols = edge_endpoints(5)
        self.assertEqual(rows.size, 10)
        for idx, (node_a, node_b) in enumerate(zip(rows, cols)):
            self.assertLess(node_a, node_b)
            self.assertEqual(edge_id(5, node_a, node_b), idx)
            self.assertEqual(edge_id(5, node_b, node_a), idx)

    def test_from_snapshots(self):
        graph = DynamicGraph.from_snapshots(4, [[(0, 1)], [], [(2, 1), (3, 0)]], tau=15)
        self.assertEqual(len(graph), 3)
        self.assertEqual(graph.n_edges, 6)
        self.assertEqual(graph.duration, 45)
        self.assertEqual(graph.edges(2), frozenset({(1, 2), (0, 3)}))
        self.assertEqual(graph.snapshots[1], frozenset())
        adj = graph.adjacency(2)
        self.assertTrue((adj == adj.T).all())
        self.assertFalse(adj.diagonal().any())
        self.assertTrue(adj[2, 1] and adj[1, 2])
        np.testing.assert_array_equal(graph.degrees()[2], [1, 1, 1, 1])
        np.testing.assert_array_equal(graph.degrees()[1], [0, 0, 0, 0])
        snapshot = graph.snapshot_graph(0)
        self.assertEqual(snapshot.number_of_nodes(), 4)
        self.assertEqual(list(snapshot.edges()), [(0, 1)])
        self.assertIn("snapshots=3", repr(graph))

        with self.assertRaises(ParameterError):
            DynamicGraph.from_snapshots(3, [[(0, 3)]])
        with self.assertRaises(ParameterError):
            DynamicGraph.from_snapshots(3, [[(1, 1)]])
        with self.assertRaises(ParameterError):
            DynamicGraph.from_snapshots(3, [])
        with self.assertRaises(ParameterError):
            DynamicGraph(3, np.zeros((2, 4), bool))
        with self.assertRaises(ValueError):
            graph.states[0, 0] = True

    def test_static_and_window(self):
        graph = DynamicGraph.static(nx.path_graph(4), steps=5)
        self.assertEqual(len(graph), 5)
        self.assertTrue(all(edges == graph.edges(0) for edges in graph.snapshots))
        window = graph.window(1, 3)
        self.assertEqual(len(window), 3)
        self.assertEqual(window, DynamicGraph.static(nx.path_graph(4), steps=3))
        self.assertNotEqual(window, graph)
        stack = graph.adjacency_stack(0, 5)
        self.assertEqual(stack.shape, (5, 4, 4))

    def test_sample_determinism(self):
        first = sample_graph(_DEFAULTS, 10, 50, seed=7)
        self.assertEqual(first, sample_graph(_DEFAULTS, 10, 50, seed=7))
        self.assertNotEqual(first, sample_graph(_DEFAULTS, 10, 50, seed=8))
        with self.assertRaises(ParameterError):
            sample_graph(_DEFAULTS, 10, 0, seed=7)
        with self.assertRaises(ParameterError):
            sample_graph(_DEFAULTS, 10, 5, seed=7, initial="random")

    def test_sample_degenerate(self):
        never_up = EdgeMarkovParams(p_up=0.0, p_down=0.5)
        graph = sample_graph(never_up, 8, 40, seed=1, initial="down")
        self.assertFalse(graph.states.any())
        graph = sample_graph(never_up, 8, 40, seed=1)
        self.assertFalse(graph.states.any())
        always_up = EdgeMarkovParams(p_up=0.5, p_down=0.0)
        graph = sample_graph(always_up, 8, 40, seed=1, initial="up")
        self.assertTrue(graph.states.all())

    def test_sample_statistics(self):
        for params in (_DEFAULTS, EdgeMarkovParams(p_up=0.2, p_down=0.3)):
            graph = sample_graph(params, 30, 2000, seed=11)
            states = graph.states
            self.assertAlmostEqual(states.mean(), params.pi_up, delta=0.005)

            before, after = states[:-1], states[1:]
            ups = before.sum()
            downs = before.size - ups
            went_down = (before & ~after).sum() / ups
            came_up = (~before & after).sum() / downs
            self.assertLess(
                abs(went_down - params.p_down),
                4 * math.sqrt(params.p_down * (1 - params.p_down) / ups),
            )
            self.assertLess(
                abs(came_up - params.p_up),
                4 * math.sqrt(params.p_up * (1 - params.p_up) / downs),
            )

    def test_step_edge_states(self):
        rng = np.random.default_rng(3)
        states = np.array([True, False] * 5000)
        nxt = step_edge_states(rng, EdgeMarkovParams(p_up=1.0, p_down=0.0), states)
        self.assertTrue(nxt.all())
        nxt = step_edge_states(rng, EdgeMarkovParams(p_up=0.0, p_down=1.0), states)
        self.assertFalse(nxt.any())


class TestFlooding(unittest.TestCase):
    """Unit test class."""

    def test_trivial_graphs(self):
        complete = DynamicGraph.static(nx.complete_graph(5), steps=3)
        outcome = flood(complete, 0, 4, alpha=1, max_delay=3)
        self.assertTrue(outcome.success)
        self.assertEqual(outcome.delivery_step, 0)
        self.assertEqual(outcome.infected_counts[0], 5)

        empty = DynamicGraph.from_snapshots(5, [[]] * 4)
        outcome = flood(empty, 0, 4, alpha=1, max_delay=4)
        self.assertFalse(outcome.success)
        self.assertIsNone(outcome.delivery_step)
        self.assertEqual(outcome.infected_counts, (1, 1, 1, 1))

        outcome = flood(complete, 0, 4, alpha=1, max_delay=0)
        self.assertFalse(outcome.success)
        self.assertEqual(outcome.infected_counts, ())

    def test_hops_per_step(self):
        path = DynamicGraph.static(nx.path_graph(4), steps=4)
        self.assertEqual(flood(path, 0, 3, alpha=1, max_delay=4).delivery_step, 2)
        self.assertEqual(flood(path, 0, 3, alpha=0.5, max_delay=4).delivery_step, 1)
        self.assertEqual(flood(path, 0, 3, alpha=1 / 3, max_delay=4).delivery_step, 0)
        self.assertFalse(flood(path, 0, 3, alpha=1, max_delay=2).success)
        outcome = flood(path, 0, 3, alpha=1, max_delay=3, start_step=1)
        self.assertEqual(outcome.delivery_step, 3)
        self.assertEqual(outcome.infected_counts[:3], (2, 3, 4))

    def test_large_bundles(self):
        link = DynamicGraph.static(nx.path_graph(2), steps=4)
        self.assertEqual(flood(link, 0, 1, alpha=2, max_delay=4).delivery_step, 1)
        self.assertEqual(flood(link, 0, 1, alpha=2.5, max_delay=4).delivery_step, 2)
        self.assertFalse(flood(link, 0, 1, alpha=2, max_delay=1).success)

        # contact interrupted after every step: nothing is transferred
        blinking = DynamicGraph.from_snapshots(2, [[(0, 1)], [], [(0, 1)], []])
        self.assertFalse(flood(blinking, 0, 1, alpha=2, max_delay=4).success)
        self.assertTrue(flood(blinking, 0, 1, alpha=1, max_delay=4).success)

        # a relay forwards only complete bundles
        path = DynamicGraph.static(nx.path_graph(3), steps=5)
        self.assertEqual(flood(path, 0, 2, alpha=2, max_delay=5).delivery_step, 3)

    def test_flood_errors(self):
        graph = DynamicGraph.static(nx.path_graph(3), steps=3)
        with self.assertRaises(ParameterError):
            flood(graph, 1, 1, alpha=1, max_delay=2)
        with self.assertRaises(ParameterError):
            flood(graph, 0, 3, alpha=1, max_delay=2)
        with self.assertRaises(ParameterError):
            flood(graph, 0, 2, alpha=1, max_delay=3, start_step=1)
        with self.assertRaises(ParameterError):
            flood(graph, 0, 2, alpha=0, max_delay=2)

    def test_sampled_monotonicity(self):
        graph = sample_graph(_DEFAULTS, 12, 30, seed=5)
        rng = np.random.default_rng(0)
        sources, dests = random_pairs(rng, 12, 200)
        self.assertFalse((sources == dests).any())

        previous = np.zeros(200, dtype=bool)
        for delay in range(0, 31, 5):
            success = flood_pairs(graph, sources, dests, alpha=1, max_delay=delay)
            self.assertTrue((success >= previous).all())
            previous = success

        previous = np.ones(200, dtype=bool)
        for alpha in (0.25, 0.5, 1, 2, 3):
            success = flood_pairs(graph, sources, dests, alpha=alpha, max_delay=30)
            self.assertTrue((success <= previous).all())
            previous = success

        counts = flood(graph, 0, 11, alpha=1, max_delay=30).infected_counts
        self.assertTrue((np.diff(counts) >= 0).all())

    def test_propagate_offsets(self):
        adj = nx.to_numpy_array(nx.path_graph(3)) > 0
        offsets = propagate(
            [adj] * 3, np.array([0, 2, 1]), np.array([2, 0, 0]), 3, alpha=1
        )
        np.testing.assert_array_equal(offsets, [1, 1, 0])


class TestEstimateDelivery(unittest.TestCase):
    """Unit test class."""

    def test_config(self):
        with self.assertRaises(ParameterError):
            SimConfig(runs=0)
        with self.assertRaises(ParameterError):
            SimConfig(runs=10, seed=-1)
        with self.assertRaises(ParameterError):
            SimConfig(runs=10, max_delay=-1)
        with self.assertRaises(ParameterError):
            SimConfig(runs=10, alpha=0)
        with self.assertRaises(ParameterError):
            estimate_delivery(EdgeMarkovParams(0.0, 0.0), 5, SimConfig(runs=10))
        with self.assertRaises(ParameterError):
            estimate_delivery(_DEFAULTS, 1, SimConfig(runs=10))

    def test_from_counts(self):
        estimate = SimEstimate.from_counts(25, 100)
        self.assertEqual(estimate.delivery_ratio, 0.25)
        self.assertAlmostEqual(estimate.std_error, math.sqrt(0.25 * 0.75 / 100))

    def test_reproducible(self):
        config = SimConfig(runs=2000, seed=42, max_delay=6, block_size=300)
        first = estimate_delivery(_DEFAULTS, 8, config)
        self.assertEqual(first, estimate_delivery(_DEFAULTS, 8, config))
        threaded = SimConfig(runs=2000, seed=42, max_delay=6, block_size=300, workers=3)
        self.assertEqual(first, estimate_delivery(_DEFAULTS, 8, threaded))
        # the block size is part of the key: regrouped runs are reproducible too
        regrouped = SimConfig(runs=2000, seed=42, max_delay=6, block_size=512)
        self.assertEqual(
            estimate_delivery(_DEFAULTS, 8, regrouped),
            estimate_delivery(
                _DEFAULTS,
                8,
                SimConfig(runs=2000, seed=42, max_delay=6, block_size=512, workers=2),
            ),
        )
        other = SimConfig(runs=2000, seed=43, max_delay=6)
        self.assertEqual(estimate_delivery(_DEFAULTS, 8, other).runs, 2000)
        zero = estimate_delivery(_DEFAULTS, 8, SimConfig(runs=50, max_delay=0))
        self.assertEqual(zero.delivery_ratio, 0.0)

    def test_worked_value(self):
        runs = 100000
        config = SimConfig(runs=runs, seed=1, max_delay=2)
        estimate = estimate_delivery(_DEFAULTS, 3, config)
        expected = 191 / 1331
        self.assertLess(
            abs(estimate.delivery_ratio - expected), 3 * _sigma(expected, runs)
        )

    def test_matches_analytic(self):
        runs = 100000
        for p_up, p_down in ((0.05, 0.5), (0.2, 0.3)):
            params = EdgeMarkovParams(p_up=p_up, p_down=p_down)
            for n_nodes in (3, 4, 5):
                # one seed per family: every delay reuses the same sample paths
                seed = 100 * n_nodes + int(p_up * 100)
                for alpha in (0.5, 1.0):
                    for delay in range(1, 9):
                        query = DeliveryQuery(n_nodes, alpha, delay)
                        expected = delivery_ratio(params, query).value
                        config = SimConfig(
                            runs=runs, seed=seed, alpha=alpha, max_delay=delay
                        )
                        observed = estimate_delivery(params, n_nodes, config)
                        self.assertLess(
                            abs(observed.delivery_ratio - expected),
                            3 * _sigma(expected, runs),
                            msg=f"N={n_nodes} alpha={alpha} d={delay} {params}",
                        )

    def test_bounds_bracket_simulation(self):
        runs = 100000
        # p_down=0.2 separates the two lower bound substitutions
        for params in (_DEFAULTS, EdgeMarkovParams(p_up=0.1, p_down=0.2)):
            for n_nodes in (4, 6):
                for alpha in (2, 3):
                    for delay in (4, 6, 12):
                        query = DeliveryQuery(n_nodes, alpha, delay)
                        config = SimConfig(
                            runs=runs, seed=9, alpha=alpha, max_delay=delay
                        )
                        observed = estimate_delivery(params, n_nodes, config)
                        ratio = observed.delivery_ratio
                        slack = 3 * _sigma(ratio, runs)
                        upper = delivery_ratio(params, query).upper
                        self.assertGreaterEqual(upper, ratio - slack)
                        for mode in ("corrected", "verbatim"):
                            lower = delivery_ratio(params, query, mode).lower
                            self.assertLessEqual(
                                lower, ratio + slack, msg=f"{mode} {params} {query}"
                            )
