# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Parameter sweeps.

A SweepSpec varies one quantity over a list of values while the others
stay fixed, optionally for several bundle sizes or delays at once. Each
sweep point is evaluated analytically (exact value or bounds) and/or by
Monte Carlo simulation, and the rows are returned in input order.

Derived sweeps:

- contact_time: mean contact duration in steps; p_down = 1 / value with
  the stationary up probability (hence the mean degree) held fixed.
- degree: mean node degree; pi_up = degree / (N - 1) with p_down held
  fixed.

"""
from concurrent.futures import ThreadPoolExecutor
import logging
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import attr
import pandas as pd

from ..common import pkg_config
from ..common.exceptions import ConfigError, ParameterError
from ..common.utility import export, parse_number_list
from ..model.delivery import DeliveryQuery, delivery_ratio
from ..model.edge_markov import EdgeMarkovParams
from ..model.epidemic_chain import LowerBoundMode
from ..sim.flooding import SimConfig, estimate_delivery
from .results import analytic_row, make_result_table, montecarlo_row
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

logger = logging.getLogger(__name__)

SWEEP_VARIABLES = ("alpha", "delay", "n_nodes", "contact_time", "degree")
OUTPUT_KINDS = ("exact", "bounds", "montecarlo")


def _check_variable(instance, attribute, value):
    del instance
    if value not in SWEEP_VARIABLES:
        raise ParameterError(
            f"{attribute.name} must be one of {', '.join(SWEEP_VARIABLES)}, got {value}"
        )


def _check_outputs(instance, attribute, value):
    del instance
    unknown = set(value) - set(OUTPUT_KINDS)
    if not value or unknown:
        raise ParameterError(
            f"{attribute.name} must be a non-empty subset of {OUTPUT_KINDS}"
        )


def _check_values(instance, attribute, value):
    del instance
    if not value:
        raise ParameterError(f"{attribute.name} must not be empty")


def _float_tuple(values) -> Tuple[float, ...]:
    return tuple(parse_number_list(values))


def _optional_float_tuple(values) -> Optional[Tuple[float, ...]]:
    return None if values is None else _float_tuple(values)


def _optional_int_tuple(values) -> Optional[Tuple[int, ...]]:
    return None if values is None else tuple(parse_number_list(values, int))


@export
@attr.s(auto_attribs=True, frozen=True)
class SweepSpec:
    """
    Single-variable parameter sweep.

    Attributes
    ----------
    variable : str
        Swept quantity: alpha, delay, n_nodes, contact_time or degree
    values : Tuple[float, ...]
        Values taken by the swept quantity
    params : EdgeMarkovParams
        Fixed edge parameters
    n_nodes : int
        Fixed node count
    alpha : float
        Fixed bundle size
    delay : int
        Fixed maximum delay in steps
    alphas : Optional[Tuple[float, ...]]
        If set, one series per bundle size replaces `alpha`
    delays : Optional[Tuple[int, ...]]
        If set, one series per delay replaces `delay`
    outputs : Tuple[str, ...]
        Row kinds produced: exact, bounds, montecarlo
    lower_bound_mode : LowerBoundMode
        Lower bound substitution for alpha > 1
    simulation : Optional[SimConfig]
        Runs, seed and block size of Monte Carlo rows; alpha and delay
        are taken from each sweep point

    """

    variable: str = attr.ib(validator=_check_variable)
    values: Tuple[float, ...] = attr.ib(converter=_float_tuple, validator=_check_values)
    params: EdgeMarkovParams = attr.ib(
        factory=lambda: EdgeMarkovParams(p_up=0.05, p_down=0.5)
    )
    n_nodes: int = attr.ib(default=20, converter=int)
    alpha: float = attr.ib(default=1.0, converter=float)
    delay: int = attr.ib(default=5, converter=int)
    alphas: Optional[Tuple[float, ...]] = attr.ib(
        default=None, converter=_optional_float_tuple
    )
    delays: Optional[Tuple[int, ...]] = attr.ib(
        default=None, converter=_optional_int_tuple
    )
    outputs: Tuple[str, ...] = attr.ib(
        default=("exact", "bounds"), converter=tuple, validator=_check_outputs
    )
    lower_bound_mode: LowerBoundMode = attr.ib(
        default=LowerBoundMode.corrected, converter=LowerBoundMode.parse
    )
    simulation: Optional[SimConfig] = None

    def __attrs_post_init__(self):
        """Check that the fixed context is valid."""
        DeliveryQuery(n_nodes=self.n_nodes, alpha=self.alpha, max_delay=self.delay)
        if "montecarlo" in self.outputs and self.simulation is None:
            raise ParameterError("Monte Carlo output needs a simulation config")

    def points(self) -> List["SweepPoint"]:
        """
        Return every evaluation point in output order.

        Series (alphas, then delays) are the outer loops, swept values
        the inner loop.

        Raises
        ------
        ParameterError
            If a swept value yields an invalid parameter; the message
            names the value.

        """
        points = []
        for alpha in self.alphas or (self.alpha,):
            for delay in self.delays or (self.delay,):
                for value in self.values:
                    points.append(self._point(value, alpha, delay))
        return points

    def _point(self, value: float, alpha: float, delay: int) -> "SweepPoint":
        context: Dict[str, Any] = dict(
            params=self.params, n_nodes=self.n_nodes, alpha=alpha, max_delay=delay
        )
        try:
            if self.variable == "alpha":
                context["alpha"] = value
            elif self.variable == "delay":
                context["max_delay"] = _whole(value)
            elif self.variable == "n_nodes":
                context["n_nodes"] = _whole(value)
            elif self.variable == "contact_time":
                context["params"] = _contact_time_params(self.params, value)
            else:
                context["params"] = _degree_params(self.params, self.n_nodes, value)
            params = context.pop("params")
            return SweepPoint(params=params, query=DeliveryQuery(**context))
        except ParameterError as err:
            raise ParameterError(f"Swept {self.variable}={value}: {err}") from err


@attr.s(auto_attribs=True, frozen=True)
class SweepPoint:
    """One parameter context of a sweep."""

    params: EdgeMarkovParams
    query: DeliveryQuery


def _whole(value: float) -> int:
    if not float(value).is_integer():
        raise ParameterError(f"{value} is not a whole number")
    return int(value)


def _contact_time_params(params: EdgeMarkovParams, steps: float) -> EdgeMarkovParams:
    if not steps >= 1:
        raise ParameterError(f"a mean contact time of {steps} steps needs p_down > 1")
    return EdgeMarkovParams.from_stationary(params.pi_up, 1.0 / steps, params.tau)


def _degree_params(
    params: EdgeMarkovParams, n_nodes: int, degree: float
) -> EdgeMarkovParams:
    pi_up = degree / (n_nodes - 1)
    return EdgeMarkovParams.from_stationary(pi_up, params.p_down, params.tau)


def _evaluate_point(spec: SweepSpec, point: SweepPoint) -> List[Dict[str, Any]]:
    query = point.query
    rows = []
    wants_exact = query.alpha <= 1 and "exact" in spec.outputs
    wants_bounds = query.alpha > 1 and "bounds" in spec.outputs
    if wants_exact or wants_bounds:
        result = delivery_ratio(point.params, query, spec.lower_bound_mode)
        rows.append(
            analytic_row(
                point.params, query.n_nodes, query.alpha, query.max_delay, result
            )
        )
    if "montecarlo" in spec.outputs and spec.simulation is not None:
        config = attr.evolve(
            spec.simulation, alpha=query.alpha, max_delay=query.max_delay
        )
        estimate = estimate_delivery(point.params, query.n_nodes, config)
        rows.append(
            montecarlo_row(
                point.params,
                query.n_nodes,
                query.alpha,
                query.max_delay,
                estimate.delivery_ratio,
                estimate.std_error,
                estimate.runs,
            )
        )
    return rows


@export
def evaluate_sweep(spec: SweepSpec, workers: int = 1) -> pd.DataFrame:
    """
    Evaluate every point of a sweep.

    Parameters
    ----------
    spec : SweepSpec
        The sweep
    workers : int, optional
        Points evaluated concurrently, by default 1. Row order does
        not depend on it.

    Returns
    -------
    pd.DataFrame
        Experiment result table.

    """
    points = spec.points()
    logger.info("Evaluating %d sweep points over %s", len(points), spec.variable)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            point_rows = list(
                executor.map(lambda point: _evaluate_point(spec, point), points)
            )
    else:
        point_rows = [_evaluate_point(spec, point) for point in points]
    return make_result_table(row for rows in point_rows for row in rows)


@export
def analytic_table(
    params: EdgeMarkovParams,
    n_nodes: int,
    alphas: Iterable[float],
    delays: Iterable[int],
    lower_bound_mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> pd.DataFrame:
    """
    Return analytic rows for every (alpha, delay) combination.

    Rows are ordered by alpha, then delay.

    """
    rows = []
    for alpha in alphas:
        for delay in delays:
            query = DeliveryQuery(n_nodes=n_nodes, alpha=alpha, max_delay=delay)
            result = delivery_ratio(params, query, lower_bound_mode)
            rows.append(analytic_row(params, n_nodes, alpha, delay, result))
    return make_result_table(rows)


@export
def simulate_table(
    params: EdgeMarkovParams,
    n_nodes: int,
    alphas: Iterable[float],
    delays: Iterable[int],
    simulation: SimConfig,
) -> pd.DataFrame:
    """
    Return Monte Carlo rows for every (alpha, delay) combination.

    Every combination uses the seed of `simulation`.

    """
    rows = []
    for alpha in alphas:
        for delay in delays:
            config = attr.evolve(simulation, alpha=alpha, max_delay=delay)
            estimate = estimate_delivery(params, n_nodes, config)
            rows.append(
                montecarlo_row(
                    params,
                    n_nodes,
                    alpha,
                    delay,
                    estimate.delivery_ratio,
                    estimate.std_error,
                    estimate.runs,
                )
            )
    return make_result_table(rows)


@export
def sweep_presets() -> List[str]:
    """Return the names of the configured sweep presets."""
    return sorted(pkg_config.get_config("Sweeps"))


@export
def preset_sweep(name: str, **kwargs) -> SweepSpec:
    """
    Create a sweep from a configured preset.

    Parameters
    ----------
    name : str
        Preset name in the `Sweeps` configuration section
    kwargs :
        SweepSpec fields overriding the preset and model defaults

    Returns
    -------
    SweepSpec
        The sweep.

    Raises
    ------
    ConfigError
        If the preset does not exist or has no variable/values.

    """
    preset = pkg_config.get_config("Sweeps", name)
    if not isinstance(preset, dict):
        raise ConfigError(
            f"Unknown sweep preset {name}. Available: {', '.join(sweep_presets())}"
        )
    if "variable" not in preset or "values" not in preset:
        raise ConfigError(f"Sweep preset {name} needs 'variable' and 'values'")
    defaults = pkg_config.get_config("ModelDefaults")
    spec_args: Dict[str, Any] = dict(
        params=EdgeMarkovParams(
            p_up=defaults.get("p_up", 0.05),
            p_down=defaults.get("p_down", 0.5),
            tau=defaults.get("tau", 1.0),
        ),
        n_nodes=defaults.get("n_nodes", 20),
        alpha=defaults.get("alpha", 1.0),
        delay=defaults.get("delay", 5),
        lower_bound_mode=defaults.get("lower_bound_mode", "corrected"),
    )
    spec_args.update(
        {key: val for key, val in preset.items() if key in attr.fields_dict(SweepSpec)}
    )
    spec_args.update(kwargs)
    return SweepSpec(**spec_args)
