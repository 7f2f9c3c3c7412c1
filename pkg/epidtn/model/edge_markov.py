# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Edge-Markovian dynamic graph model.

Each of the N(N-1)/2 potential edges of the graph is an independent
two-state (down/up) Markov chain. `p_up` is the probability per time step
of a down edge coming up, `p_down` the probability of an up edge going
down. Contact and inter-contact durations are geometric with means
`tau / p_down` and `tau / p_up`.

This module holds the parameter types, the closed-form stationary
quantities and the estimation of parameters from trace statistics.

"""
import math
from typing import Tuple

import attr
import numpy as np

from ..common.exceptions import EstimationError, ParameterError
from ..common.utility import check_probability, export
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

_EDGE_STATES = ("down", "up")


def _probability(instance, attribute, value):
    del instance
    check_probability(attribute.name, value)


def _positive(instance, attribute, value):
    del instance
    if not value > 0 or math.isinf(value):
        raise ParameterError(f"{attribute.name} must be a positive number, got {value}")


def _node_count(instance, attribute, value):
    del instance
    if value < 2:
        raise ParameterError(f"{attribute.name} must be at least 2, got {value}")


@export
@attr.s(auto_attribs=True, frozen=True)
class EdgeMarkovParams:
    """
    Per-edge two-state Markov parameters.

    Attributes
    ----------
    p_up : float
        Probability per time step of a down edge coming up.
    p_down : float
        Probability per time step of an up edge going down.
    tau : float
        Duration of one time step in seconds.

    Notes
    -----
    Values of exactly 0 are accepted so that degenerate edges (links
    that never die, or never appear) can be expressed. Operations
    that need finite expected durations reject them.

    """

    p_up: float = attr.ib(converter=float, validator=_probability)
    p_down: float = attr.ib(converter=float, validator=_probability)
    tau: float = attr.ib(default=1.0, converter=float, validator=_positive)

    @property
    def pi_up(self) -> float:
        """Return the stationary probability of an edge being up."""
        total = self.p_up + self.p_down
        if total == 0:
            raise ParameterError(
                "Stationary distribution undefined when p_up = p_down = 0"
            )
        return self.p_up / total

    @property
    def pi_down(self) -> float:
        """Return the stationary probability of an edge being down."""
        total = self.p_up + self.p_down
        if total == 0:
            raise ParameterError(
                "Stationary distribution undefined when p_up = p_down = 0"
            )
        return self.p_down / total

    def edge_matrix(self) -> np.ndarray:
        """
        Return the per-edge transition matrix.

        Returns
        -------
        np.ndarray
            2x2 row-stochastic matrix with state order (down, up).

        """
        return np.array(
            [[1.0 - self.p_up, self.p_up], [self.p_down, 1.0 - self.p_down]]
        )

    def require_ergodic(self):
        """
        Check that both transition probabilities are strictly positive.

        Raises
        ------
        ParameterError
            If p_up or p_down is zero.

        """
        check_probability("p_up", self.p_up, allow_zero=False)
        check_probability("p_down", self.p_down, allow_zero=False)

    @classmethod
    def from_stationary(
        cls, pi_up: float, p_down: float, tau: float = 1.0
    ) -> "EdgeMarkovParams":
        """
        Create parameters with a given stationary up probability.

        Parameters
        ----------
        pi_up : float
            Target stationary probability of an edge being up, in (0, 1).
        p_down : float
            Probability per step of an up edge going down.
        tau : float, optional
            Time step in seconds, by default 1.0

        Returns
        -------
        EdgeMarkovParams
            Parameters with p_up = p_down * pi_up / (1 - pi_up).

        Raises
        ------
        ParameterError
            If pi_up is not in (0, 1) or the derived p_up exceeds 1.

        """
        pi_up = check_probability("pi_up", pi_up, allow_zero=False)
        if pi_up >= 1:
            raise ParameterError(f"pi_up must be less than 1, got {pi_up}")
        p_up = p_down * pi_up / (1.0 - pi_up)
        if p_up > 1:
            raise ParameterError(
                f"pi_up={pi_up} with p_down={p_down} requires p_up={p_up} > 1"
            )
        return cls(p_up=p_up, p_down=p_down, tau=tau)


@export
@attr.s(auto_attribs=True, frozen=True)
class StationaryStats:
    """Stationary quantities of the edge-Markov process."""

    pi_up: float
    pi_down: float
    e_t_up: float
    e_t_down: float


@export
@attr.s(auto_attribs=True, frozen=True)
class TraceStats:
    """
    Summary statistics measured on a contact trace.

    Attributes
    ----------
    n_nodes : int
        Number of nodes N.
    mean_link_lifetime : float
        Mean duration of a contact in seconds.
    mean_degree : float
        Mean node degree over all snapshots.
    tau : float
        Sampling period in seconds.

    """

    n_nodes: int = attr.ib(converter=int, validator=_node_count)
    mean_link_lifetime: float = attr.ib(converter=float)
    mean_degree: float = attr.ib(converter=float)
    tau: float = attr.ib(default=1.0, converter=float, validator=_positive)

    @mean_link_lifetime.validator
    def _check_lifetime(self, attribute, value):
        if math.isnan(value) or value < 0:
            raise ParameterError(f"{attribute.name} must be non-negative, got {value}")

    @mean_degree.validator
    def _check_degree(self, attribute, value):
        if math.isnan(value) or value < 0 or value > self.n_nodes - 1:
            raise ParameterError(
                f"{attribute.name} must be in [0, {self.n_nodes - 1}], got {value}"
            )


@export
def stationary_stats(params: EdgeMarkovParams) -> StationaryStats:
    """
    Return the stationary probabilities and expected durations.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters. Both probabilities must be non-zero.

    Returns
    -------
    StationaryStats
        pi_up = p_up / (p_up + p_down), e_t_up = tau / p_down,
        e_t_down = tau / p_up.

    Raises
    ------
    ParameterError
        If p_up or p_down is zero (infinite expected duration).

    """
    params.require_ergodic()
    return StationaryStats(
        pi_up=params.pi_up,
        pi_down=params.pi_down,
        e_t_up=params.tau / params.p_down,
        e_t_down=params.tau / params.p_up,
    )


@export
def mean_degree(params: EdgeMarkovParams, n_nodes: int) -> float:
    """
    Return the average node degree (N - 1) * pi_up.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes (at least 2)

    Returns
    -------
    float
        Expected degree of a node in the stationary regime.

    """
    if n_nodes < 2:
        raise ParameterError(f"n_nodes must be at least 2, got {n_nodes}")
    return (n_nodes - 1) * params.pi_up


@export
def estimate_params(stats: TraceStats) -> EdgeMarkovParams:
    """
    Derive edge-Markov parameters from trace statistics.

    Parameters
    ----------
    stats : TraceStats
        Measured mean link lifetime, mean degree and node count.

    Returns
    -------
    EdgeMarkovParams
        p_down = tau / lifetime, p_up = p_down * pi_up / (1 - pi_up)
        with pi_up = degree / (N - 1).

    Raises
    ------
    EstimationError
        If the trace has no contacts, the lifetime is shorter than the
        sampling period, the graph is complete at all times or a derived
        probability falls outside (0, 1]. Values are never clamped.

    """
    if stats.mean_degree == 0:
        raise EstimationError("Mean degree is 0: no contacts, p_up is undefined")
    if stats.mean_link_lifetime < stats.tau:
        raise EstimationError(
            f"Mean link lifetime {stats.mean_link_lifetime} is shorter than "
            + f"the sampling period {stats.tau}"
        )
    pi_up = stats.mean_degree / (stats.n_nodes - 1)
    if pi_up >= 1:
        raise EstimationError(
            f"Mean degree {stats.mean_degree} equals N - 1: links never go down"
        )
    p_down = stats.tau / stats.mean_link_lifetime
    p_up = p_down * pi_up / (1.0 - pi_up)
    if p_up > 1:
        raise EstimationError(
            f"Derived p_up={p_up} exceeds 1: lifetime and degree are inconsistent"
        )
    return EdgeMarkovParams(p_up=p_up, p_down=p_down, tau=stats.tau)


@export
def exact_trace_stats(params: EdgeMarkovParams, n_nodes: int) -> TraceStats:
    """
    Return the trace statistics implied by the closed forms.

    The inverse of `estimate_params`: lifetime = tau / p_down and
    degree = (N - 1) * pi_up.

    """
    params.require_ergodic()
    return TraceStats(
        n_nodes=n_nodes,
        mean_link_lifetime=params.tau / params.p_down,
        mean_degree=mean_degree(params, n_nodes),
        tau=params.tau,
    )


@export
def duration_pmf(params: EdgeMarkovParams, steps: int, state: str = "up") -> float:
    """
    Return the probability that a contact or inter-contact lasts `steps`.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    steps : int
        Duration in time steps (>= 1)
    state : str, optional
        "up" for contact durations, "down" for inter-contact
        durations, by default "up"

    Returns
    -------
    float
        Geometric probability p (1 - p)^(steps - 1) with p = p_down for
        contacts and p = p_up for inter-contacts.

    """
    if state not in _EDGE_STATES:
        raise ParameterError(f"state must be one of {_EDGE_STATES}, got {state}")
    if steps < 1:
        return 0.0
    leave = params.p_down if state == "up" else params.p_up
    return leave * (1.0 - leave) ** (steps - 1)


def split_alpha(alpha: float) -> Tuple[int, int]:
    """
    Return the hop budget and interval length for a bundle size.

    Parameters
    ----------
    alpha : float
        Bundle size in units of link size (> 0).

    Returns
    -------
    Tuple[int, int]
        (floor(1/alpha), ceil(alpha)); for alpha <= 1 the interval
        length is 1 and for alpha > 1 the hop budget is 1.

    """
    if not alpha > 0 or math.isinf(alpha):
        raise ParameterError(f"alpha must be a positive number, got {alpha}")
    if alpha <= 1:
        return int(math.floor(1.0 / alpha + 1e-12)), 1
    return 1, int(math.ceil(alpha - 1e-12))
