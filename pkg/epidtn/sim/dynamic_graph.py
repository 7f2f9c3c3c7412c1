# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Dynamic graph type and edge-Markovian graph sampling.

A DynamicGraph is a time-indexed sequence of undirected snapshots over
nodes 0..N-1. It is stored as a read-only boolean matrix with one row
per snapshot and one column per potential edge (node pairs in
`numpy.triu_indices` order); edge sets are derived on demand.

"""
import logging
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from ..common.exceptions import ParameterError
from ..common.utility import export
from ..model.edge_markov import EdgeMarkovParams
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
_INITIAL_STATES = ("stationary", "down", "up")


def edge_endpoints(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return the (row, col) endpoint arrays of all N(N-1)/2 node pairs."""
    return np.triu_indices(n_nodes, k=1)


def edge_id(n_nodes: int, node_a: int, node_b: int) -> int:
    """Return the column index of the undirected edge {node_a, node_b}."""
    low, high = (node_a, node_b) if node_a < node_b else (node_b, node_a)
    return low * n_nodes - low * (low + 1) // 2 + (high - low - 1)


@export
class DynamicGraph:
    """
    Time-indexed sequence of undirected edge sets over N nodes.

    Attributes
    ----------
    n_nodes : int
        Number of nodes N.
    tau : float
        Seconds per snapshot.
    states : np.ndarray
        Read-only boolean matrix of shape (snapshots, N(N-1)/2).

    """

    def __init__(self, n_nodes: int, states: np.ndarray, tau: float = 1.0):
        """
        Create a dynamic graph from an edge-state matrix.

        Parameters
        ----------
        n_nodes : int
            Number of nodes N (>= 2)
        states : np.ndarray
            Boolean matrix, one row per snapshot, one column per node pair
        tau : float, optional
            Seconds per snapshot, by default 1.0

        Raises
        ------
        ParameterError
            If the matrix shape does not match N, there are no snapshots
            or tau is not positive.

        """
        if n_nodes < 2:
            raise ParameterError(f"n_nodes must be at least 2, got {n_nodes}")
        if not tau > 0:
            raise ParameterError(f"tau must be positive, got {tau}")
        states = np.array(states, dtype=bool, copy=True)
        n_edges = n_nodes * (n_nodes - 1) // 2
        if states.ndim != 2 or states.shape[1] != n_edges:
            raise ParameterError(
                f"Edge-state matrix must have {n_edges} columns for {n_nodes} nodes"
            )
        if states.shape[0] < 1:
            raise ParameterError("A dynamic graph needs at least one snapshot")
        states.setflags(write=False)
        self.n_nodes = int(n_nodes)
        self.tau = float(tau)
        self.states = states

    @classmethod
    def from_snapshots(
        cls, n_nodes: int, snapshots: Iterable[Iterable[Edge]], tau: float = 1.0
    ) -> "DynamicGraph":
        """
        Create a dynamic graph from a sequence of edge sets.

        Parameters
        ----------
        n_nodes : int
            Number of nodes N
        snapshots : Iterable[Iterable[Edge]]
            One collection of (node_a, node_b) pairs per snapshot
        tau : float, optional
            Seconds per snapshot, by default 1.0

        Raises
        ------
        ParameterError
            If an endpoint is out of range or an edge is a self-loop.

        """
        snapshot_list = [list(edges) for edges in snapshots]
        states = np.zeros((len(snapshot_list), n_nodes * (n_nodes - 1) // 2), bool)
        for step, edges in enumerate(snapshot_list):
            for node_a, node_b in edges:
                if not (0 <= node_a < n_nodes and 0 <= node_b < n_nodes):
                    raise ParameterError(
                        f"Edge ({node_a}, {node_b}) has an endpoint "
                        + f"outside [0, {n_nodes})"
                    )
                if node_a == node_b:
                    raise ParameterError(f"Self-loop on node {node_a}")
                states[step, edge_id(n_nodes, node_a, node_b)] = True
        return cls(n_nodes, states, tau)

    @classmethod
    def static(cls, graph: nx.Graph, steps: int, tau: float = 1.0) -> "DynamicGraph":
        """
        Create a dynamic graph repeating one static topology.

        Parameters
        ----------
        graph : nx.Graph
            Graph whose nodes are the integers 0..N-1
        steps : int
            Number of snapshots
        tau : float, optional
            Seconds per snapshot, by default 1.0

        """
        edges = list(graph.edges())
        return cls.from_snapshots(graph.number_of_nodes(), [edges] * steps, tau)

    def __len__(self) -> int:
        """Return the number of snapshots."""
        return self.states.shape[0]

    def __eq__(self, other) -> bool:
        """Return True if both graphs have identical snapshots."""
        if not isinstance(other, DynamicGraph):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and self.tau == other.tau
            and np.array_equal(self.states, other.states)
        )

    def __repr__(self) -> str:
        """Return a short description."""
        return (
            f"DynamicGraph(n_nodes={self.n_nodes}, snapshots={len(self)}, "
            + f"tau={self.tau})"
        )

    @property
    def n_edges(self) -> int:
        """Return the number of potential edges N(N-1)/2."""
        return self.states.shape[1]

    @property
    def duration(self) -> float:
        """Return the covered time in seconds."""
        return len(self) * self.tau

    def edges(self, step: int) -> FrozenSet[Edge]:
        """Return the edge set of snapshot `step` as (low, high) pairs."""
        rows, cols = edge_endpoints(self.n_nodes)
        up_edges = np.flatnonzero(self.states[step])
        return frozenset((int(rows[idx]), int(cols[idx])) for idx in up_edges)

    @property
    def snapshots(self) -> List[FrozenSet[Edge]]:
        """Return the edge sets of all snapshots."""
        return [self.edges(step) for step in range(len(self))]

    def adjacency(self, step: int) -> np.ndarray:
        """Return the symmetric boolean adjacency matrix of snapshot `step`."""
        return self.adjacency_stack(step, 1)[0]

    def adjacency_stack(self, start: int, count: int) -> np.ndarray:
        """Return adjacency matrices of snapshots start..start+count-1."""
        rows, cols = edge_endpoints(self.n_nodes)
        block = self.states[start : start + count]
        adj = np.zeros((block.shape[0], self.n_nodes, self.n_nodes), dtype=bool)
        adj[:, rows, cols] = block
        adj[:, cols, rows] = block
        return adj

    def snapshot_graph(self, step: int) -> nx.Graph:
        """Return snapshot `step` as a networkx graph over all N nodes."""
        graph = nx.Graph(step=step)
        graph.add_nodes_from(range(self.n_nodes))
        graph.add_edges_from(self.edges(step))
        return graph

    def degrees(self) -> np.ndarray:
        """Return node degrees per snapshot, shape (snapshots, N)."""
        rows, cols = edge_endpoints(self.n_nodes)
        degree = np.zeros((len(self), self.n_nodes), dtype=np.int64)
        np.add.at(degree.T, rows, self.states.T)
        np.add.at(degree.T, cols, self.states.T)
        return degree

    def window(self, start: int, count: int) -> "DynamicGraph":
        """Return the sub-sequence of snapshots start..start+count-1."""
        return DynamicGraph(self.n_nodes, self.states[start : start + count], self.tau)


def _initial_states(
    rng: np.random.Generator,
    params: EdgeMarkovParams,
    shape: Sequence[int],
    initial: str,
) -> np.ndarray:
    if initial == "stationary":
        return rng.random(shape) < params.pi_up
    if initial == "down":
        return np.zeros(shape, dtype=bool)
    if initial == "up":
        return np.ones(shape, dtype=bool)
    raise ParameterError(f"initial must be one of {_INITIAL_STATES}, got {initial}")


def step_edge_states(
    rng: np.random.Generator, params: EdgeMarkovParams, states: np.ndarray
) -> np.ndarray:
    """
    Advance every edge one step of the two-state chain.

    Parameters
    ----------
    rng : np.random.Generator
        Random source
    params : EdgeMarkovParams
        Edge parameters
    states : np.ndarray
        Current boolean edge states (any shape)

    Returns
    -------
    np.ndarray
        Next edge states: an up edge stays up with probability
        1 - p_down, a down edge comes up with probability p_up.

    """
    draw = rng.random(states.shape)
    return np.where(states, draw >= params.p_down, draw < params.p_up)


@export
def sample_graph(
    params: EdgeMarkovParams,
    n_nodes: int,
    steps: int,
    seed: int,
    initial: str = "stationary",
) -> DynamicGraph:
    """
    Sample an edge-Markovian dynamic graph.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N (>= 2)
    steps : int
        Number of snapshots (>= 1)
    seed : int
        Seed of the random generator; equal seeds give equal graphs
    initial : str, optional
        Initial edge states: "stationary" draws each edge up with
        probability pi_up, "down"/"up" force all edges, by default
        "stationary"

    Returns
    -------
    DynamicGraph
        The sampled graph, with tau taken from `params`.

    """
    if steps < 1:
        raise ParameterError(f"steps must be at least 1, got {steps}")
    if n_nodes < 2:
        raise ParameterError(f"n_nodes must be at least 2, got {n_nodes}")
    rng = np.random.default_rng(seed)
    n_edges = n_nodes * (n_nodes - 1) // 2
    states = np.empty((steps, n_edges), dtype=bool)
    states[0] = _initial_states(rng, params, (n_edges,), initial)
    for step in range(1, steps):
        states[step] = step_edge_states(rng, params, states[step - 1])
    logger.debug("Sampled %d snapshots over %d nodes", steps, n_nodes)
    return DynamicGraph(n_nodes, states, params.tau)
