# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Delivery ratio evaluation tests."""
import unittest
import warnings

import numpy as np

from epidtn.common.exceptions import ParameterError
from epidtn.model.delivery import (
    DeliveryQuery,
    DeliveryResult,
    ResultKind,
    delivery_curve,
    delivery_ratio,
    evolve,
    max_bundle_size,
    min_delay_for_ratio,
)
from epidtn.model.edge_markov import EdgeMarkovParams
from epidtn.model.epidemic_chain import build_dynamic_matrix

_DEFAULTS = EdgeMarkovParams(p_up=0.05, p_down=0.5)


def _ratio(n_nodes, alpha, delay, params=_DEFAULTS, mode="corrected"):
    query = DeliveryQuery(n_nodes=n_nodes, alpha=alpha, max_delay=delay)
    return delivery_ratio(params, query, mode)


class TestDelivery(unittest.TestCase):
    """Unit test class."""

    def test_worked_values(self):
        result = _ratio(3, 1, 1)
        self.assertEqual(result.kind, ResultKind.exact)
        self.assertAlmostEqual(result.value, 1 / 11, places=12)
        self.assertAlmostEqual(_ratio(3, 1, 2).value, 191 / 1331, places=12)
        self.assertAlmostEqual(_ratio(3, 1, 2).value, 0.1435, places=4)
        self.assertEqual(_ratio(2, 1, 0).value, 0.0)
        self.assertEqual(_ratio(20, 0.5, 0).value, 0.0)

    def test_n2_closed_form(self):
        # two nodes: deliver at step 1 with pi_up, then p_up per step
        for delay in range(1, 8):
            expected = 1 - (10 / 11) * 0.95 ** (delay - 1)
            self.assertAlmostEqual(_ratio(2, 1, delay).value, expected, places=12)

    def test_static_hops(self):
        # alpha = 1/2 adds a static hop: N=3, d=1
        pi_up = 1 / 11
        pi_down = 10 / 11
        expected = pi_up + pi_down * pi_up * pi_up
        self.assertAlmostEqual(_ratio(3, 0.5, 1).value, expected, places=12)
        # 0.4 also allows two hops; 1/3 allows three
        self.assertAlmostEqual(_ratio(3, 0.5, 3).value, _ratio(3, 0.4, 3).value)
        self.assertGreater(_ratio(4, 1 / 3, 3).value, _ratio(4, 0.5, 3).value)

    def test_monotone_in_delay(self):
        for alpha in (0.25, 0.5, 1, 2, 3):
            curve = delivery_curve(_DEFAULTS, 6, alpha, 30)
            for column in ("value", "lower", "upper"):
                values = curve[column].dropna().to_numpy()
                self.assertTrue((np.diff(values) >= -1e-12).all())

    def test_bounds(self):
        for n_nodes in (4, 6):
            for alpha in (2, 3):
                for delay in (4, 6, 12):
                    corrected = _ratio(n_nodes, alpha, delay)
                    verbatim = _ratio(n_nodes, alpha, delay, mode="verbatim")
                    self.assertEqual(corrected.kind, ResultKind.bounded)
                    self.assertLessEqual(corrected.lower, corrected.upper)
                    self.assertLessEqual(verbatim.lower, corrected.lower + 1e-15)
                    self.assertEqual(verbatim.upper, corrected.upper)
                    self.assertEqual(corrected.intervals, delay // int(np.ceil(alpha)))

    def test_no_intervals(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = _ratio(5, 3, 2)
        self.assertTrue(any(issubclass(w.category, RuntimeWarning) for w in caught))
        self.assertTrue(result.no_intervals)
        self.assertEqual((result.lower, result.upper), (0.0, 0.0))

    def test_params_degenerate(self):
        # links never go down once up: every node is eventually reached
        params = EdgeMarkovParams(p_up=0.5, p_down=0.0)
        self.assertAlmostEqual(_ratio(3, 1, 1, params).value, 1.0)
        # links never come up: only initially up links count
        params = EdgeMarkovParams(p_up=0.0, p_down=0.5)
        self.assertEqual(_ratio(3, 1, 4, params).value, 0.0)

    def test_curve_shapes(self):
        # bundle size: non-increasing in alpha with a plateau for small bundles
        alphas = [0.125, 0.25, 0.5, 1.0]
        exact = [_ratio(20, alpha, 16).value for alpha in alphas]
        self.assertTrue((np.diff(exact) <= 1e-12).all())
        self.assertLess(exact[0] - exact[2], 0.05)
        lowers, uppers = [], []
        for alpha in (2, 3, 4, 5):
            result = _ratio(20, alpha, 16)
            lowers.append(result.lower)
            uppers.append(result.upper)
        self.assertTrue((np.diff(lowers) <= 1e-12).all())
        self.assertTrue((np.diff(uppers) <= 1e-12).all())
        self.assertLessEqual(uppers[0], exact[-1])

        # node count: increasing toward 1
        by_nodes = [_ratio(n_nodes, 1, 5).value for n_nodes in (2, 5, 10, 20, 30, 40)]
        self.assertTrue((np.diff(by_nodes) > 0).all())
        self.assertGreaterEqual(by_nodes[-1], 0.99)

        # delay threshold
        threshold = min_delay_for_ratio(_DEFAULTS, 20, 1, 0.5)
        self.assertIsNotNone(threshold)
        self.assertLess(_ratio(20, 1, threshold // 2).value, 0.5)
        self.assertGreater(_ratio(20, 1, 2 * threshold).value, 0.9)

    def test_evolve(self):
        matrix = build_dynamic_matrix(_DEFAULTS, 5)
        initial = matrix.initial_vector()
        split = evolve(evolve(initial, matrix, 3), matrix, 4)
        np.testing.assert_allclose(split, evolve(initial, matrix, 7), atol=1e-12)
        power = initial @ np.linalg.matrix_power(matrix.entries, 7)
        np.testing.assert_allclose(power, evolve(initial, matrix, 7), atol=1e-12)
        np.testing.assert_array_equal(evolve(initial, matrix, 0), initial)
        self.assertAlmostEqual(evolve(initial, matrix, 5)[-1], _ratio(5, 1, 5).value)
        with self.assertRaises(ParameterError):
            evolve(initial[:-1], matrix, 1)
        with self.assertRaises(ParameterError):
            evolve(initial * 2, matrix, 1)
        with self.assertRaises(ParameterError):
            evolve(initial, matrix, -1)

    def test_query_validation(self):
        with self.assertRaises(ParameterError):
            DeliveryQuery(n_nodes=1, alpha=1, max_delay=1)
        with self.assertRaises(ParameterError):
            DeliveryQuery(n_nodes=3, alpha=0, max_delay=1)
        with self.assertRaises(ParameterError):
            DeliveryQuery(n_nodes=3, alpha=1, max_delay=-1)
        with self.assertRaises(ParameterError):
            DeliveryResult(ResultKind.bounded, lower=0.5, upper=0.4)

    def test_result_helpers(self):
        result = DeliveryResult(ResultKind.bounded, lower=0.2, upper=0.4)
        self.assertAlmostEqual(result.estimate, 0.3)
        self.assertEqual(result.guaranteed, 0.2)
        exact = DeliveryResult(ResultKind.exact, value=0.7)
        self.assertEqual(exact.estimate, 0.7)

    def test_curve_matches_ratio(self):
        curve = delivery_curve(_DEFAULTS, 5, 1, 8)
        self.assertEqual(list(curve["delay"]), list(range(9)))
        for delay in (0, 3, 8):
            self.assertAlmostEqual(
                curve.loc[delay, "value"], _ratio(5, 1, delay).value, places=12
            )

    def test_tuning(self):
        threshold = min_delay_for_ratio(_DEFAULTS, 20, 1, 0.9)
        self.assertGreaterEqual(_ratio(20, 1, threshold).value, 0.9)
        self.assertLess(_ratio(20, 1, threshold - 1).value, 0.9)
        self.assertIsNone(min_delay_for_ratio(_DEFAULTS, 3, 1, 0.999, max_delay=3))
        best = max_bundle_size(_DEFAULTS, 20, 16, 0.9, [0.5, 1, 2, 4, 8])
        self.assertIsNotNone(best)
        result = _ratio(20, best, 16)
        self.assertGreaterEqual(result.guaranteed, 0.9)
        self.assertIsNone(max_bundle_size(_DEFAULTS, 3, 1, 0.99, [0.5, 1, 2]))
        with self.assertRaises(ParameterError):
            min_delay_for_ratio(_DEFAULTS, 20, 1, 0)
