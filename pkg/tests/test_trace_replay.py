# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Contact trace parsing, statistics and replay tests."""
import math
import os
from pathlib import Path
import unittest
import warnings

import networkx as nx
import numpy as np

from epidtn.common.exceptions import ParameterError, TraceFormatError
from epidtn.model.delivery import DeliveryQuery, delivery_ratio
from epidtn.model.edge_markov import EdgeMarkovParams, duration_pmf, estimate_params
from epidtn.sim.dynamic_graph import DynamicGraph, sample_graph
from epidtn.sim.trace_replay import (
    ContactRecord,
    ReplayConfig,
    component_ceiling,
    duration_summary,
    link_durations,
    parse_trace,
    read_contacts,
    replay_experiment,
    serialize_graph,
    trace_stats,
)

_test_data_folders = [
    d for d, _, _ in os.walk(os.getcwd()) if d.endswith("/tests/testdata")
]
if len(_test_data_folders) == 1:
    _TEST_DATA = _test_data_folders[0]
else:
    _TEST_DATA = "./tests/testdata"

_SMALL_TRACE = ["0,A,B", "15,A,B", "45,A,B", "20,B,C"]


def _quiet_stats(graph):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return trace_stats(graph)


def _replay_values(table):
    return table[table["kind"] == "replay"]["value"].to_numpy()


class TestTraceParsing(unittest.TestCase):
    """Unit test class."""

    def test_parse_small_trace(self):
        graph = parse_trace(_SMALL_TRACE, tau=15)
        self.assertEqual(graph.n_nodes, 3)
        self.assertEqual(len(graph), 4)
        self.assertEqual(
            graph.snapshots,
            [
                frozenset({(0, 1)}),
                frozenset({(0, 1), (1, 2)}),
                frozenset(),
                frozenset({(0, 1)}),
            ],
        )

    def test_parse_file(self):
        graph = parse_trace(Path(_TEST_DATA).joinpath("contacts.csv"), tau=15)
        self.assertEqual(graph, parse_trace(_SMALL_TRACE, tau=15))
        records = read_contacts(str(Path(_TEST_DATA).joinpath("contacts.csv")))
        self.assertEqual(records[0], ContactRecord(0.0, "A", "B"))
        self.assertEqual(len(records), 4)

    def test_bucket_boundaries(self):
        graph = parse_trace(["14.999,a,b", "15,b,c", "0.3,a,c"], tau=15)
        self.assertEqual(graph.edges(0), frozenset({(0, 1), (0, 2)}))
        self.assertEqual(graph.edges(1), frozenset({(1, 2)}))
        graph = parse_trace(["0.3,a,b"], tau=0.1)
        self.assertEqual(len(graph), 4)
        self.assertEqual(graph.edges(3), frozenset({(0, 1)}))

    def test_node_order(self):
        graph = parse_trace(["0,x,y"], tau=1, nodes=["y", "z"], steps=3)
        self.assertEqual(graph.n_nodes, 3)
        self.assertEqual(len(graph), 3)
        self.assertEqual(graph.edges(0), frozenset({(0, 2)}))

    def test_format_errors(self):
        cases = [
            (["0,A,B", "", "x,A,B"], 3),
            (["# header", "5,A"], 2),
            (["5,A,A"], 1),
            (["0,A,B", "-1,A,B"], 2),
            (["0,A,B", "1,,B"], 2),
            (["0,A,B", "nan,A,B"], 2),
        ]
        for lines, line_number in cases:
            with self.assertRaises(TraceFormatError) as ctx:
                read_contacts(lines)
            self.assertEqual(ctx.exception.line_number, line_number)
            self.assertIn(f"line {line_number}", str(ctx.exception))
        with self.assertRaises(TraceFormatError):
            read_contacts(["# nothing here", ""])
        with self.assertRaises(TraceFormatError):
            parse_trace(["0,A,B"] * 2 + ["3,C"], tau=1)
        with self.assertRaises(ParameterError):
            parse_trace(_SMALL_TRACE, tau=0)

    def test_round_trip(self):
        for tau in (15.0, 0.1):
            params = EdgeMarkovParams(p_up=0.2, p_down=0.3, tau=tau)
            graph = sample_graph(params, 6, 40, seed=3)
            lines = serialize_graph(graph)
            nodes = [str(node) for node in range(graph.n_nodes)]
            rebuilt = parse_trace(lines, tau=tau, nodes=nodes, steps=len(graph))
            self.assertEqual(rebuilt, graph)


class TestTraceStats(unittest.TestCase):
    """Unit test class."""

    def test_small_trace(self):
        graph = parse_trace(_SMALL_TRACE, tau=15)
        with self.assertWarns(UserWarning):
            stats = trace_stats(graph)
        self.assertAlmostEqual(stats.mean_link_lifetime, 20.0)
        self.assertAlmostEqual(stats.mean_degree, 2 / 3)
        params = estimate_params(stats)
        self.assertAlmostEqual(params.p_down, 0.75)
        self.assertAlmostEqual(params.p_up, 0.375)

    def test_censored_lifetime(self):
        graph = parse_trace(["0,a,b", "30,a,b", "45,a,b"], tau=15)
        with self.assertWarns(UserWarning):
            stats = trace_stats(graph)
        self.assertAlmostEqual(stats.mean_link_lifetime, 22.5)

    def test_complete_and_empty(self):
        graph = DynamicGraph.static(nx.complete_graph(5), steps=10, tau=2)
        stats = _quiet_stats(graph)
        self.assertAlmostEqual(stats.mean_degree, 4.0)
        self.assertAlmostEqual(stats.mean_link_lifetime, 20.0)
        stats = _quiet_stats(DynamicGraph.from_snapshots(4, [[]] * 5))
        self.assertEqual(stats.mean_link_lifetime, 0.0)
        self.assertEqual(stats.mean_degree, 0.0)

    def test_synthetic_stats(self):
        params = EdgeMarkovParams(p_up=0.05, p_down=0.57, tau=15)
        graph = sample_graph(params, 30, 3000, seed=21)
        stats = _quiet_stats(graph)
        lifetime = 15 / 0.57
        self.assertLess(abs(stats.mean_link_lifetime - lifetime), 0.05 * lifetime)
        degree = 29 * params.pi_up
        self.assertAlmostEqual(stats.mean_degree, degree, delta=0.05 * degree)
        recovered = estimate_params(stats)
        self.assertAlmostEqual(recovered.p_up, 0.05, delta=0.05 * 0.05)
        self.assertAlmostEqual(recovered.p_down, 0.57, delta=0.05 * 0.57)

    def test_link_durations(self):
        runs = link_durations(parse_trace(_SMALL_TRACE, tau=15))
        self.assertEqual(
            list(runs.columns),
            ["node_a", "node_b", "state", "start", "length", "censored"],
        )
        first_edge = runs[(runs["node_a"] == 0) & (runs["node_b"] == 1)]
        self.assertEqual(list(first_edge["state"]), ["up", "down", "up"])
        self.assertEqual(list(first_edge["length"]), [2, 1, 1])
        self.assertEqual(list(first_edge["censored"]), [False, False, True])
        # every edge's runs cover the whole trace
        totals = runs.groupby(["node_a", "node_b"])["length"].sum()
        self.assertTrue((totals == 4).all())
        self.assertEqual(len(totals), 3)

    def test_duration_summary(self):
        graph = parse_trace(_SMALL_TRACE, tau=15)
        params = EdgeMarkovParams(p_up=0.375, p_down=0.75, tau=15)
        summary = duration_summary(graph, params)
        self.assertEqual(list(summary["length"]), [1, 2])
        self.assertEqual(list(summary["seconds"]), [15, 30])
        self.assertEqual(list(summary["count"]), [1, 1])
        self.assertEqual(list(summary["fraction"]), [0.5, 0.5])
        self.assertAlmostEqual(summary["geometric"].iloc[1], duration_pmf(params, 2))
        empty = duration_summary(DynamicGraph.from_snapshots(3, [[]] * 3))
        self.assertTrue(empty.empty)
        self.assertNotIn("geometric", empty.columns)


class TestReplay(unittest.TestCase):
    """Unit test class."""

    def test_config(self):
        config = ReplayConfig(horizon=60, injection_interval=30, delay_values="15,30")
        self.assertEqual(config.batch_starts(15), [0, 2])
        self.assertEqual(config.delay_steps(15), [1, 2])
        with self.assertRaises(ParameterError):
            config.delay_steps(20)
        with self.assertRaises(ParameterError):
            ReplayConfig(pairs_per_batch=0)
        with self.assertRaises(ParameterError):
            ReplayConfig(delay_values=())
        with self.assertRaises(ParameterError):
            ReplayConfig(alpha_values=(1, -2))

    def test_static_graphs(self):
        config = ReplayConfig(
            horizon=150,
            injection_interval=15,
            pairs_per_batch=10,
            alpha_values=(1.0, 0.5),
            delay_values=(15, 30, 60),
        )
        empty = DynamicGraph.from_snapshots(5, [[]] * 14, tau=15)
        table = replay_experiment(empty, config)
        self.assertEqual(len(table), 6)
        self.assertTrue((_replay_values(table) == 0).all())
        self.assertTrue((table["n_samples"] == 100).all())

        path = DynamicGraph.static(nx.path_graph(5), steps=14, tau=15)
        table = replay_experiment(path, config)
        values = _replay_values(table)
        # four hops at most: one step per hop delivers everything in 60 s
        self.assertEqual(values[2], 1.0)
        self.assertEqual(values[5], 1.0)
        self.assertTrue((np.diff(values[:3]) >= 0).all())
        self.assertTrue((values[3:] >= values[:3]).all())
        self.assertEqual(list(table["delay"][:3]), [15.0, 30.0, 60.0])

        ceiling = component_ceiling(path, config)
        self.assertTrue((_replay_values(ceiling) == 1.0).all())
        self.assertTrue((ceiling["alpha"] == 0.0).all())

    def test_replay_errors(self):
        graph = DynamicGraph.from_snapshots(3, [[(0, 1)]] * 10, tau=15)
        with self.assertRaises(ParameterError):
            replay_experiment(graph, ReplayConfig(horizon=120, delay_values=(60,)))
        with self.assertRaises(ParameterError):
            replay_experiment(graph, ReplayConfig(horizon=60, delay_values=(20,)))
        with self.assertRaises(ParameterError):
            component_ceiling(graph, ReplayConfig(horizon=150, delay_values=(15,)))

    def test_reproducible(self):
        params = EdgeMarkovParams(p_up=0.1, p_down=0.4, tau=15)
        graph = sample_graph(params, 12, 200, seed=4)
        config = ReplayConfig(
            horizon=1500, delay_values=(150, 300), alpha_values=(0.5, 1, 2), seed=8
        )
        first = replay_experiment(graph, config)
        self.assertTrue(first.equals(replay_experiment(graph, config)))
        ceiling = _replay_values(component_ceiling(graph, config))
        values = _replay_values(first).reshape(3, 2)
        for row in values:
            self.assertTrue((row <= ceiling).all())
            self.assertLessEqual(row[0], row[1])
        # larger bundles are delivered less often
        self.assertTrue((np.diff(values, axis=0) <= 0).all())

    def test_matches_analytic(self):
        params = EdgeMarkovParams(p_up=0.05, p_down=0.5, tau=1)
        delays = (2, 4, 8)
        graph = sample_graph(params, 10, 60010, seed=17)
        config = ReplayConfig(
            horizon=60000,
            injection_interval=10,
            pairs_per_batch=1,
            alpha_values=(0.5, 1.0),
            delay_values=delays,
            seed=2,
        )
        table = replay_experiment(graph, config)
        samples = 6000
        self.assertTrue((table["n_samples"] == samples).all())
        for _, row in table.iterrows():
            query = DeliveryQuery(10, row["alpha"], int(row["delay"]))
            expected = delivery_ratio(params, query).value
            sigma = math.sqrt(expected * (1 - expected) / samples)
            self.assertLess(
                abs(row["value"] - expected),
                3 * sigma,
                msg=f"alpha={row['alpha']} delay={row['delay']}",
            )
