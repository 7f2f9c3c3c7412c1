# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Delivery ratio evaluation.

The delivery ratio of a bundle of size `alpha` within `max_delay` steps
is the Succ mass of the chain distribution after evolving the Init unit
vector:

- alpha = 1: d applications of T
- alpha < 1: d applications of (T followed by floor(1/alpha) - 1 R steps)
- alpha > 1: lower/upper bounds from floor(d / ceil(alpha)) applications
  of T_l / T_u

Evaluation always uses repeated vector-matrix products.

"""
from enum import Enum
import math
from typing import Iterable, List, Optional, Union
import warnings

import attr
import numpy as np
import pandas as pd

from ..common.exceptions import ParameterError
from ..common.utility import export
from .edge_markov import EdgeMarkovParams, split_alpha
from .epidemic_chain import (
    LowerBoundMode,
    TransitionMatrix,
    build_bound_matrix,
    build_dynamic_matrix,
    build_static_matrix,
)
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

_SUM_TOLERANCE = 1e-9


@export
class ResultKind(Enum):
    """Kind of analytic delivery result."""

    exact = "exact"
    bounded = "bounds"


def _check_query_nodes(instance, attribute, value):
    del instance
    if value < 2:
        raise ParameterError(f"{attribute.name} must be at least 2, got {value}")


def _check_alpha(instance, attribute, value):
    del instance
    if not value > 0 or math.isinf(value):
        raise ParameterError(f"{attribute.name} must be positive, got {value}")


def _check_delay(instance, attribute, value):
    del instance
    if value < 0:
        raise ParameterError(f"{attribute.name} must be non-negative, got {value}")


@export
@attr.s(auto_attribs=True, frozen=True)
class DeliveryQuery:
    """
    Delivery ratio query.

    Attributes
    ----------
    n_nodes : int
        Number of nodes N (>= 2)
    alpha : float
        Bundle size in units of link size (> 0)
    max_delay : int
        Maximum delay d in time steps. 0 is accepted and always
        yields a delivery ratio of 0.

    """

    n_nodes: int = attr.ib(converter=int, validator=_check_query_nodes)
    alpha: float = attr.ib(converter=float, validator=_check_alpha)
    max_delay: int = attr.ib(converter=int, validator=_check_delay)


@export
@attr.s(auto_attribs=True, frozen=True)
class DeliveryResult:
    """
    Analytic delivery ratio.

    Attributes
    ----------
    kind : ResultKind
        exact or bounded
    value : Optional[float]
        Exact delivery ratio (exact results only)
    lower : Optional[float]
        Lower bound (bounded results only)
    upper : Optional[float]
        Upper bound (bounded results only)
    intervals : int
        Number of chain transitions evaluated: steps for exact
        results, intervals of ceil(alpha) steps for bounds.
    no_intervals : bool
        True if the delay is shorter than one interval, in which
        case both bounds are 0.

    """

    kind: ResultKind
    value: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    intervals: int = 0
    no_intervals: bool = False

    def __attrs_post_init__(self):
        """Check probability ranges and bound ordering."""
        for name in ("value", "lower", "upper"):
            prob = getattr(self, name)
            if prob is not None and not -1e-12 <= prob <= 1 + 1e-12:
                raise ParameterError(f"{name}={prob} is not a probability")
        if self.kind == ResultKind.bounded:
            if self.lower is None or self.upper is None:
                raise ParameterError("Bounded results need lower and upper values")
            if self.lower > self.upper + 1e-12:
                raise ParameterError(
                    f"Lower bound {self.lower} exceeds upper bound {self.upper}"
                )
        elif self.value is None:
            raise ParameterError("Exact results need a value")

    @property
    def estimate(self) -> float:
        """Return the exact value, or the bound midpoint for bounded results."""
        if self.kind == ResultKind.exact:
            return float(self.value)  # type: ignore
        return (float(self.lower) + float(self.upper)) / 2  # type: ignore

    @property
    def guaranteed(self) -> float:
        """Return the exact value, or the lower bound for bounded results."""
        if self.kind == ResultKind.exact:
            return float(self.value)  # type: ignore
        return float(self.lower)  # type: ignore


@export
def evolve(
    initial: np.ndarray, matrix: Union[TransitionMatrix, np.ndarray], steps: int
) -> np.ndarray:
    """
    Evolve a state distribution by repeated left multiplication.

    Parameters
    ----------
    initial : np.ndarray
        Row vector of state probabilities (sums to 1)
    matrix : Union[TransitionMatrix, np.ndarray]
        Transition matrix
    steps : int
        Number of multiplications (>= 0)

    Returns
    -------
    np.ndarray
        The distribution after `steps` transitions.

    Raises
    ------
    ParameterError
        If the dimensions do not match, the vector is not a
        distribution or steps is negative.

    """
    entries = matrix.entries if isinstance(matrix, TransitionMatrix) else matrix
    vector = np.asarray(initial, dtype=float)
    if vector.ndim != 1 or entries.shape != (vector.size, vector.size):
        raise ParameterError(
            f"Vector of length {vector.size} does not match matrix "
            + f"of shape {entries.shape}"
        )
    if abs(vector.sum() - 1.0) > _SUM_TOLERANCE:
        raise ParameterError(f"State vector sums to {vector.sum()}, not 1")
    if steps < 0:
        raise ParameterError(f"steps must be non-negative, got {steps}")
    for _ in range(steps):
        vector = vector @ entries
    return vector


def _step_matrices(
    params: EdgeMarkovParams, n_nodes: int, alpha: float
) -> List[TransitionMatrix]:
    """Return the matrices applied, in order, for one time step with alpha <= 1."""
    hops, _ = split_alpha(alpha)
    matrices = [build_dynamic_matrix(params, n_nodes)]
    if hops > 1:
        static = build_static_matrix(params, n_nodes)
        matrices.extend([static] * (hops - 1))
    return matrices


def _succ_masses(
    initial: np.ndarray, matrices: List[TransitionMatrix], transitions: int
) -> np.ndarray:
    """Return Succ mass after 0..transitions applications of the matrix product."""
    masses = np.zeros(transitions + 1)
    vector = initial
    for step in range(1, transitions + 1):
        for matrix in matrices:
            vector = vector @ matrix.entries
        masses[step] = vector[-1]
    return masses


@export
def delivery_ratio(
    params: EdgeMarkovParams,
    query: DeliveryQuery,
    lower_bound_mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> DeliveryResult:
    """
    Return the analytic delivery ratio for a query.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    query : DeliveryQuery
        Node count, bundle size and maximum delay
    lower_bound_mode : Union[str, LowerBoundMode], optional
        p_up substitution for the alpha > 1 lower bound,
        by default corrected

    Returns
    -------
    DeliveryResult
        Exact value for alpha <= 1, bounds for alpha > 1.

    """
    curve = _curve_values(params, query, lower_bound_mode)
    return curve[-1]


def _curve_values(
    params: EdgeMarkovParams,
    query: DeliveryQuery,
    lower_bound_mode: Union[str, LowerBoundMode],
) -> List[DeliveryResult]:
    """Return the delivery results for every delay 0..query.max_delay."""
    n_nodes, alpha, max_delay = query.n_nodes, query.alpha, query.max_delay
    if alpha <= 1:
        matrices = _step_matrices(params, n_nodes, alpha)
        masses = _succ_masses(matrices[0].initial_vector(), matrices, max_delay)
        return [
            DeliveryResult(ResultKind.exact, value=_clip(mass), intervals=delay)
            for delay, mass in enumerate(masses)
        ]

    interval = split_alpha(alpha)[1]
    intervals = max_delay // interval
    lower_matrix = build_bound_matrix(params, n_nodes, alpha, "lower", lower_bound_mode)
    upper_matrix = build_bound_matrix(params, n_nodes, alpha, "upper")
    lower = _succ_masses(lower_matrix.initial_vector(), [lower_matrix], intervals)
    upper = _succ_masses(upper_matrix.initial_vector(), [upper_matrix], intervals)
    if intervals == 0:
        warnings.warn(
            f"Delay {max_delay} is shorter than one interval of {interval} steps "
            + f"for alpha={alpha}: both bounds are 0",
            RuntimeWarning,
        )
    results = []
    for delay in range(max_delay + 1):
        count = delay // interval
        results.append(
            DeliveryResult(
                ResultKind.bounded,
                lower=_clip(lower[count]),
                upper=_clip(upper[count]),
                intervals=count,
                no_intervals=count == 0,
            )
        )
    return results


def _clip(value: float) -> float:
    return float(min(max(value, 0.0), 1.0))


@export
def delivery_curve(
    params: EdgeMarkovParams,
    n_nodes: int,
    alpha: float,
    max_delay: int,
    lower_bound_mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> pd.DataFrame:
    """
    Return the delivery ratio for every delay from 0 to `max_delay`.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N
    alpha : float
        Bundle size
    max_delay : int
        Largest delay evaluated
    lower_bound_mode : Union[str, LowerBoundMode], optional
        Lower bound substitution, by default corrected

    Returns
    -------
    pd.DataFrame
        Columns `delay`, `kind`, `value`, `lower`, `upper`.

    """
    query = DeliveryQuery(n_nodes=n_nodes, alpha=alpha, max_delay=max_delay)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        results = _curve_values(params, query, lower_bound_mode)
    return pd.DataFrame(
        {
            "delay": np.arange(max_delay + 1),
            "kind": [res.kind.value for res in results],
            "value": [res.value for res in results],
            "lower": [res.lower for res in results],
            "upper": [res.upper for res in results],
        }
    )


@export
def min_delay_for_ratio(
    params: EdgeMarkovParams,
    n_nodes: int,
    alpha: float,
    target: float,
    max_delay: int = 1000,
    lower_bound_mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> Optional[int]:
    """
    Return the smallest delay whose delivery ratio reaches `target`.

    For alpha > 1 the lower bound is used, so the returned delay is
    one at which the target is guaranteed.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N
    alpha : float
        Bundle size
    target : float
        Target delivery ratio in (0, 1]
    max_delay : int, optional
        Largest delay searched, by default 1000
    lower_bound_mode : Union[str, LowerBoundMode], optional
        Lower bound substitution, by default corrected

    Returns
    -------
    Optional[int]
        The delay threshold in steps, or None if `target` is not
        reached within `max_delay`.

    """
    if not 0 < target <= 1:
        raise ParameterError(f"target must be in (0, 1], got {target}")
    query = DeliveryQuery(n_nodes=n_nodes, alpha=alpha, max_delay=max_delay)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        results = _curve_values(params, query, lower_bound_mode)
    for delay, result in enumerate(results):
        if result.guaranteed >= target:
            return delay
    return None


@export
def max_bundle_size(
    params: EdgeMarkovParams,
    n_nodes: int,
    max_delay: int,
    target: float,
    alphas: Iterable[float],
    lower_bound_mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> Optional[float]:
    """
    Return the largest candidate bundle size that reaches `target`.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N
    max_delay : int
        Maximum delay d in steps
    target : float
        Target delivery ratio in (0, 1]
    alphas : Iterable[float]
        Candidate bundle sizes
    lower_bound_mode : Union[str, LowerBoundMode], optional
        Lower bound substitution, by default corrected

    Returns
    -------
    Optional[float]
        The largest alpha whose exact value (alpha <= 1) or lower
        bound (alpha > 1) is at least `target`, None if no candidate
        qualifies.

    """
    if not 0 < target <= 1:
        raise ParameterError(f"target must be in (0, 1], got {target}")
    best = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for alpha in sorted(set(alphas)):
            query = DeliveryQuery(n_nodes=n_nodes, alpha=alpha, max_delay=max_delay)
            result = delivery_ratio(params, query, lower_bound_mode)
            if result.guaranteed >= target:
                best = alpha
    return best
