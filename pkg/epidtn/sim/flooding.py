# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Epidemic flooding on dynamic graphs and Monte Carlo delivery estimates.

The propagation kernel works on a batch of runs at once. Each step
receives a (batch, N, N) boolean adjacency stack and updates a
(batch, N) infected matrix:

- alpha <= 1: floor(1/alpha) synchronous infection rounds on the step's
  topology. With one round, nodes infected during the step do not
  retransmit before the next step.
- alpha > 1: a directed transfer counter per (transmitter, receiver)
  grows while the edge is up and the transmitter was infected at the
  start of the step, and resets to 0 otherwise. The receiver is
  infected once the counter reaches ceil(alpha).

"""
from concurrent.futures import ThreadPoolExecutor
import logging
import math
from typing import Iterable, List, Optional, Tuple

import attr
import numpy as np

from ..common.exceptions import ParameterError
from ..common.utility import export
from ..model.edge_markov import EdgeMarkovParams, split_alpha
from .dynamic_graph import DynamicGraph, edge_endpoints, step_edge_states
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

logger = logging.getLogger(__name__)

_MAX_SEED = 2 ** 64 - 1


def _at_least_one(instance, attribute, value):
    del instance
    if value < 1:
        raise ParameterError(f"{attribute.name} must be at least 1, got {value}")


def _non_negative(instance, attribute, value):
    del instance
    if value < 0:
        raise ParameterError(f"{attribute.name} must be non-negative, got {value}")


def _seed(instance, attribute, value):
    del instance
    if not 0 <= value <= _MAX_SEED:
        raise ParameterError(f"{attribute.name} must be a 64-bit unsigned integer")


def _bundle_size(instance, attribute, value):
    del instance
    if not value > 0 or math.isinf(value):
        raise ParameterError(f"{attribute.name} must be positive, got {value}")


@export
@attr.s(auto_attribs=True, frozen=True)
class SimConfig:
    """
    Monte Carlo estimation settings.

    Attributes
    ----------
    runs : int
        Number of independent trials (>= 1)
    seed : int
        Master seed; block b of runs uses the substream
        SeedSequence(seed, spawn_key=(b,))
    alpha : float
        Bundle size
    max_delay : int
        Maximum delay d in steps
    block_size : int
        Runs simulated together in one vectorized block. Substreams are
        keyed by block index, so estimates are reproducible for a given
        (seed, block_size) pair; changing block_size changes the draws.
    workers : int
        Threads evaluating blocks concurrently

    """

    runs: int = attr.ib(converter=int, validator=_at_least_one)
    seed: int = attr.ib(default=0, converter=int, validator=_seed)
    alpha: float = attr.ib(default=1.0, converter=float, validator=_bundle_size)
    max_delay: int = attr.ib(default=5, converter=int, validator=_non_negative)
    block_size: int = attr.ib(default=4096, converter=int, validator=_at_least_one)
    workers: int = attr.ib(default=1, converter=int, validator=_at_least_one)


@export
@attr.s(auto_attribs=True, frozen=True)
class SimEstimate:
    """Monte Carlo delivery ratio with its binomial standard error."""

    delivery_ratio: float
    std_error: float
    runs: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, runs: int) -> "SimEstimate":
        """Create an estimate from a success count."""
        ratio = successes / runs
        return cls(
            delivery_ratio=ratio,
            std_error=math.sqrt(ratio * (1.0 - ratio) / runs),
            runs=runs,
            successes=successes,
        )


@export
@attr.s(auto_attribs=True, frozen=True)
class FloodOutcome:
    """
    Result of flooding one bundle over a dynamic graph.

    Attributes
    ----------
    success : bool
        True if the destination was infected within the delay
    delivery_step : Optional[int]
        Snapshot index during which the destination was infected
    infected_counts : Tuple[int, ...]
        Number of infected nodes after each simulated step

    """

    success: bool
    delivery_step: Optional[int] = None
    infected_counts: Tuple[int, ...] = ()


def propagate(
    adjacency_steps: Iterable[np.ndarray],
    sources: np.ndarray,
    dests: np.ndarray,
    n_nodes: int,
    alpha: float,
    counts: Optional[List[np.ndarray]] = None,
) -> np.ndarray:
    """
    Flood a batch of bundles step by step.

    Parameters
    ----------
    adjacency_steps : Iterable[np.ndarray]
        Per-step adjacency, each of shape (batch, N, N) or (N, N)
        when all runs share the topology
    sources : np.ndarray
        Source node per run
    dests : np.ndarray
        Destination node per run
    n_nodes : int
        Number of nodes N
    alpha : float
        Bundle size
    counts : Optional[List[np.ndarray]], optional
        If given, the infected count per run is appended after
        every step

    Returns
    -------
    np.ndarray
        Step offset (0-based) at which each destination was infected,
        -1 for runs that failed.

    """
    hops, interval = split_alpha(alpha)
    batch = len(sources)
    runs = np.arange(batch)
    infected = np.zeros((batch, n_nodes), dtype=bool)
    infected[runs, sources] = True
    delivered = np.full(batch, -1, dtype=np.int64)
    progress = None
    if interval > 1:
        progress = np.zeros((batch, n_nodes, n_nodes), dtype=np.int32)

    for step, adj in enumerate(adjacency_steps):
        if adj.ndim == 2:
            adj = np.broadcast_to(adj, (batch, n_nodes, n_nodes))
        if progress is None:
            for _ in range(hops):
                reached = np.any(adj & infected[:, :, None], axis=1)
                fresh = reached & ~infected
                if not fresh.any():
                    break
                infected |= fresh
        else:
            active = adj & infected[:, :, None]
            progress = np.where(active, progress + 1, 0)
            infected |= np.any(progress >= interval, axis=1)
        hit = (delivered < 0) & infected[runs, dests]
        delivered[hit] = step
        if counts is not None:
            counts.append(infected.sum(axis=1))
        if counts is None and (delivered >= 0).all():
            break
    return delivered


@export
def flood(
    graph: DynamicGraph,
    source: int,
    dest: int,
    alpha: float,
    max_delay: int,
    start_step: int = 0,
) -> FloodOutcome:
    """
    Flood a bundle from `source` and report whether `dest` receives it.

    Parameters
    ----------
    graph : DynamicGraph
        The dynamic graph
    source : int
        Source node
    dest : int
        Destination node
    alpha : float
        Bundle size in units of link size
    max_delay : int
        Number of steps available
    start_step : int, optional
        Snapshot used for the first step, by default 0

    Returns
    -------
    FloodOutcome
        Success flag, snapshot of delivery and infected counts.

    Raises
    ------
    ParameterError
        If source equals dest, a node is out of range or the graph
        has fewer than start_step + max_delay snapshots.

    """
    _check_pair(graph.n_nodes, source, dest)
    _check_window(graph, start_step, max_delay)
    counts: List[np.ndarray] = []
    delivered = propagate(
        (graph.adjacency(start_step + k) for k in range(max_delay)),
        np.array([source]),
        np.array([dest]),
        graph.n_nodes,
        alpha,
        counts=counts,
    )[0]
    success = bool(delivered >= 0)
    return FloodOutcome(
        success=success,
        delivery_step=int(start_step + delivered) if success else None,
        infected_counts=tuple(int(count[0]) for count in counts),
    )


@export
def flood_pairs(
    graph: DynamicGraph,
    sources: np.ndarray,
    dests: np.ndarray,
    alpha: float,
    max_delay: int,
    start_step: int = 0,
) -> np.ndarray:
    """
    Flood several bundles injected at the same step.

    Parameters
    ----------
    graph : DynamicGraph
        The dynamic graph
    sources : np.ndarray
        Source node per bundle
    dests : np.ndarray
        Destination node per bundle
    alpha : float
        Bundle size
    max_delay : int
        Number of steps available
    start_step : int, optional
        Snapshot used for the first step, by default 0

    Returns
    -------
    np.ndarray
        Boolean success per bundle.

    """
    sources = np.asarray(sources, dtype=np.int64)
    dests = np.asarray(dests, dtype=np.int64)
    for source, dest in zip(sources, dests):
        _check_pair(graph.n_nodes, int(source), int(dest))
    _check_window(graph, start_step, max_delay)
    delivered = propagate(
        (graph.adjacency(start_step + k) for k in range(max_delay)),
        sources,
        dests,
        graph.n_nodes,
        alpha,
    )
    return delivered >= 0


def _check_pair(n_nodes: int, source: int, dest: int):
    if source == dest:
        raise ParameterError(f"Source and destination are the same node ({source})")
    for node in (source, dest):
        if not 0 <= node < n_nodes:
            raise ParameterError(f"Node {node} outside [0, {n_nodes})")


def _check_window(graph: DynamicGraph, start_step: int, max_delay: int):
    if start_step < 0 or max_delay < 0:
        raise ParameterError("start_step and max_delay must be non-negative")
    if start_step + max_delay > len(graph):
        raise ParameterError(
            f"start_step + max_delay = {start_step + max_delay} exceeds "
            + f"the {len(graph)} snapshots of the graph"
        )


def random_pairs(
    rng: np.random.Generator, n_nodes: int, count: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw `count` uniformly random ordered pairs of distinct nodes."""
    sources = rng.integers(n_nodes, size=count)
    dests = (sources + rng.integers(1, n_nodes, size=count)) % n_nodes
    return sources, dests


def _block_adjacency(
    rng: np.random.Generator,
    params: EdgeMarkovParams,
    n_nodes: int,
    count: int,
    steps: int,
):
    """Yield adjacency stacks of `count` independent sampled graphs."""
    rows, cols = edge_endpoints(n_nodes)
    states = rng.random((count, rows.size)) < params.pi_up
    for step in range(steps):
        if step > 0:
            states = step_edge_states(rng, params, states)
        adj = np.zeros((count, n_nodes, n_nodes), dtype=bool)
        adj[:, rows, cols] = states
        adj[:, cols, rows] = states
        yield adj


def _simulate_block(
    params: EdgeMarkovParams, n_nodes: int, config: SimConfig, block: int
) -> int:
    """Return the number of successful runs in block `block`."""
    first = block * config.block_size
    count = min(config.block_size, config.runs - first)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(block,)))
    sources, dests = random_pairs(rng, n_nodes, count)
    delivered = propagate(
        _block_adjacency(rng, params, n_nodes, count, config.max_delay),
        sources,
        dests,
        n_nodes,
        config.alpha,
    )
    successes = int((delivered >= 0).sum())
    logger.debug("Block %d: %d/%d deliveries", block, successes, count)
    return successes


@export
def estimate_delivery(
    params: EdgeMarkovParams, n_nodes: int, config: SimConfig
) -> SimEstimate:
    """
    Estimate the delivery ratio by simulation.

    Every run samples a fresh edge-Markovian graph starting from the
    stationary distribution and a uniformly random ordered
    source/destination pair.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N (>= 2)
    config : SimConfig
        Runs, seed, bundle size and delay

    Returns
    -------
    SimEstimate
        Success frequency and binomial standard error. Identical
        arguments give identical results whatever `workers` is.

    """
    if n_nodes < 2:
        raise ParameterError(f"n_nodes must be at least 2, got {n_nodes}")
    if params.p_up + params.p_down == 0:
        raise ParameterError("Stationary initialization needs p_up + p_down > 0")
    blocks = range(math.ceil(config.runs / config.block_size))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            counts = list(
                executor.map(
                    lambda block: _simulate_block(params, n_nodes, config, block),
                    blocks,
                )
            )
    else:
        counts = [_simulate_block(params, n_nodes, config, block) for block in blocks]
    estimate = SimEstimate.from_counts(sum(counts), config.runs)
    logger.info(
        "Simulated %d runs: delivery ratio %.6f (+/- %.6f)",
        config.runs,
        estimate.delivery_ratio,
        estimate.std_error,
    )
    return estimate
