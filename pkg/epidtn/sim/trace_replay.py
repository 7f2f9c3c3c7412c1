# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Contact trace ingestion, statistics and epidemic replay.

Trace format: UTF-8 text, one contact per line as
``time_seconds,node_a,node_b``. Lines starting with ``#`` and blank
lines are ignored. A contact recorded at time t belongs to snapshot
floor(t / tau): the two nodes are assumed to be in contact for that
whole sampling period and nothing is extrapolated between samples.

"""
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union
import warnings

import attr
import networkx as nx
import numpy as np
import pandas as pd

from ..common.exceptions import ParameterError, TraceFormatError
from ..common.utility import export, parse_number_list
from ..experiments.results import make_result_table, replay_row
from ..model.edge_markov import EdgeMarkovParams, TraceStats, duration_pmf
from .dynamic_graph import DynamicGraph, edge_endpoints, edge_id
from .flooding import propagate, random_pairs
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

logger = logging.getLogger(__name__)

# Relative slack absorbing float error when times sit on bucket boundaries.
_BUCKET_EPS = 1e-9


def _check_time(instance, attribute, value):
    del instance
    if math.isnan(value) or math.isinf(value) or value < 0:
        raise TraceFormatError(
            f"{attribute.name} must be a non-negative number, got {value}"
        )


@export
@attr.s(auto_attribs=True, frozen=True)
class ContactRecord:
    """A sighting of two nodes in contact at a point in time."""

    time: float = attr.ib(converter=float, validator=_check_time)
    node_a: str = attr.ib(converter=str)
    node_b: str = attr.ib(converter=str)

    @node_b.validator
    def _check_nodes(self, attribute, value):
        del attribute
        if value == self.node_a:
            raise TraceFormatError(f"Self-contact of node {value}")


def _positive(instance, attribute, value):
    del instance
    if not value > 0 or math.isinf(value):
        raise ParameterError(f"{attribute.name} must be positive, got {value}")


def _non_empty(instance, attribute, value):
    del instance
    if not value:
        raise ParameterError(f"{attribute.name} must not be empty")
    if any(not item > 0 for item in value):
        raise ParameterError(f"{attribute.name} values must be positive")


def _number_tuple(values) -> Tuple[float, ...]:
    return tuple(parse_number_list(values))


@export
@attr.s(auto_attribs=True, frozen=True)
class ReplayConfig:
    """
    Trace replay settings.

    Attributes
    ----------
    horizon : float
        Bundles are injected during the first `horizon` seconds
    injection_interval : float
        Seconds between injection batches
    pairs_per_batch : int
        Random source/destination pairs per batch
    alpha_values : Tuple[float, ...]
        Bundle sizes evaluated
    delay_values : Tuple[float, ...]
        Maximum delays evaluated, in seconds
    seed : int
        Seed of the pair sampling

    """

    horizon: float = attr.ib(default=2000.0, converter=float, validator=_positive)
    injection_interval: float = attr.ib(
        default=15.0, converter=float, validator=_positive
    )
    pairs_per_batch: int = attr.ib(default=60, converter=int, validator=_positive)
    alpha_values: Tuple[float, ...] = attr.ib(
        default=(1.0,), converter=_number_tuple, validator=_non_empty
    )
    delay_values: Tuple[float, ...] = attr.ib(
        default=(300.0,), converter=_number_tuple, validator=_non_empty
    )
    seed: int = attr.ib(default=0, converter=int)

    def steps(self, seconds: float, tau: float, name: str) -> int:
        """Return `seconds` as a whole number of tau periods."""
        count = seconds / tau
        if abs(count - round(count)) > _BUCKET_EPS * max(1.0, count):
            raise ParameterError(f"{name}={seconds} is not a multiple of tau={tau}")
        return int(round(count))

    def batch_starts(self, tau: float) -> List[int]:
        """Return the snapshot index of every injection batch."""
        step = self.steps(self.injection_interval, tau, "injection_interval")
        return list(range(0, int(math.ceil(self.horizon / tau - _BUCKET_EPS)), step))

    def delay_steps(self, tau: float) -> List[int]:
        """Return the delays in steps."""
        return [self.steps(delay, tau, "delay") for delay in self.delay_values]


def _split_record(line: str, line_number: int) -> ContactRecord:
    fields = [field.strip() for field in line.split(",")]
    if len(fields) != 3:
        raise TraceFormatError(
            f"expected 3 comma-separated fields, got {len(fields)}", line_number
        )
    try:
        time = float(fields[0])
    except ValueError:
        raise TraceFormatError(f"invalid time {fields[0]!r}", line_number) from None
    if not fields[1] or not fields[2]:
        raise TraceFormatError("empty node identifier", line_number)
    try:
        return ContactRecord(time=time, node_a=fields[1], node_b=fields[2])
    except TraceFormatError as err:
        raise TraceFormatError(str(err), line_number) from None


def _lines(source: Union[str, Path, Iterable[str]]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as trace_file:
            yield from trace_file
    else:
        yield from source


@export
def read_contacts(source: Union[str, Path, Iterable[str]]) -> List[ContactRecord]:
    """
    Read contact records.

    Parameters
    ----------
    source : Union[str, Path, Iterable[str]]
        Path of a trace file, or an iterable of lines

    Returns
    -------
    List[ContactRecord]
        Records in input order.

    Raises
    ------
    TraceFormatError
        For a malformed line (reported with its 1-based line number)
        or a trace without records.

    """
    records = []
    for line_number, line in enumerate(_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        records.append(_split_record(text, line_number))
    if not records:
        raise TraceFormatError("trace contains no contact records")
    return records


@export
def node_index(
    records: Sequence[ContactRecord], nodes: Optional[Sequence[str]] = None
) -> Dict[str, int]:
    """
    Map node identifiers to dense indices.

    Parameters
    ----------
    records : Sequence[ContactRecord]
        Contact records
    nodes : Optional[Sequence[str]], optional
        Identifiers that take indices 0..len(nodes)-1 first; any other
        identifier follows in order of first appearance

    Returns
    -------
    Dict[str, int]
        Identifier to index mapping.

    """
    index: Dict[str, int] = {}
    for node in nodes or ():
        index.setdefault(str(node), len(index))
    for record in records:
        index.setdefault(record.node_a, len(index))
        index.setdefault(record.node_b, len(index))
    return index


@export
def contacts_to_graph(
    records: Sequence[ContactRecord],
    tau: float,
    nodes: Optional[Sequence[str]] = None,
    steps: Optional[int] = None,
) -> DynamicGraph:
    """
    Discretize contact records into a dynamic graph.

    Parameters
    ----------
    records : Sequence[ContactRecord]
        Contact records, in any order
    tau : float
        Sampling period in seconds
    nodes : Optional[Sequence[str]], optional
        Fixed leading node order, see `node_index`
    steps : Optional[int], optional
        Minimum snapshot count; by default the trace ends with the
        snapshot of the last record

    Returns
    -------
    DynamicGraph
        Snapshot k holds edge {a, b} if a record for that pair has a
        time in [k * tau, (k + 1) * tau).

    """
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    if not records:
        raise TraceFormatError("trace contains no contact records")
    index = node_index(records, nodes)
    n_nodes = len(index)
    if n_nodes < 2:
        raise TraceFormatError("trace must involve at least two nodes")
    ordered = sorted(records, key=lambda rec: rec.time)
    times = np.array([rec.time for rec in ordered])
    buckets = np.floor(times / tau + _BUCKET_EPS).astype(np.int64)
    cols = np.array(
        [edge_id(n_nodes, index[rec.node_a], index[rec.node_b]) for rec in ordered],
        dtype=np.int64,
    )
    n_steps = max(int(buckets.max()) + 1, steps or 0)
    states = np.zeros((n_steps, n_nodes * (n_nodes - 1) // 2), dtype=bool)
    states[buckets, cols] = True
    logger.debug(
        "Parsed %d records over %d nodes into %d snapshots",
        len(records),
        n_nodes,
        n_steps,
    )
    return DynamicGraph(n_nodes, states, tau)


@export
def parse_trace(
    source: Union[str, Path, Iterable[str]],
    tau: float,
    nodes: Optional[Sequence[str]] = None,
    steps: Optional[int] = None,
) -> DynamicGraph:
    """
    Parse a contact trace into a dynamic graph.

    Parameters
    ----------
    source : Union[str, Path, Iterable[str]]
        Path of a trace file, or an iterable of lines
    tau : float
        Sampling period in seconds
    nodes : Optional[Sequence[str]], optional
        Identifiers that take indices 0..len(nodes)-1; other
        identifiers are numbered in order of first appearance
    steps : Optional[int], optional
        Minimum number of snapshots

    Returns
    -------
    DynamicGraph
        The discretized trace.

    Raises
    ------
    TraceFormatError
        For malformed lines or an empty trace.

    """
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    return contacts_to_graph(read_contacts(source), tau, nodes=nodes, steps=steps)


@export
def serialize_graph(graph: DynamicGraph) -> List[str]:
    """
    Return the contact-record lines of a dynamic graph.

    One record per up edge per snapshot, at time k * tau, with nodes
    named by their index. `parse_trace` of these lines with
    ``nodes=[str(i) for i in range(N)]`` and ``steps=len(graph)``
    rebuilds the same graph.

    """
    rows, cols = edge_endpoints(graph.n_nodes)
    lines = []
    for step in range(len(graph)):
        time = repr(step * graph.tau)
        for edge in np.flatnonzero(graph.states[step]):
            lines.append(f"{time},{rows[edge]},{cols[edge]}")
    return lines


def _run_table(graph: DynamicGraph) -> Dict[str, np.ndarray]:
    """Return the maximal constant runs of every edge state sequence."""
    values = graph.states.T
    n_steps = values.shape[1]
    change = np.ones(values.shape, dtype=bool)
    change[:, 1:] = values[:, 1:] != values[:, :-1]
    edge, start = np.nonzero(change)
    last = np.ones(edge.size, dtype=bool)
    last[:-1] = edge[1:] != edge[:-1]
    end = np.empty_like(start)
    end[:-1] = start[1:]
    end[last] = n_steps
    return {
        "edge": edge,
        "up": values[edge, start],
        "start": start,
        "length": end - start,
        "censored": last,
    }


@export
def link_durations(graph: DynamicGraph) -> pd.DataFrame:
    """
    Return every maximal up (contact) and down (inter-contact) run.

    Parameters
    ----------
    graph : DynamicGraph
        The dynamic graph

    Returns
    -------
    pd.DataFrame
        Columns node_a, node_b, state ("up"/"down"), start (snapshot),
        length (steps) and censored (run still ongoing at the final
        snapshot), ordered by edge then start.

    """
    runs = _run_table(graph)
    rows, cols = edge_endpoints(graph.n_nodes)
    return pd.DataFrame(
        {
            "node_a": rows[runs["edge"]],
            "node_b": cols[runs["edge"]],
            "state": np.where(runs["up"], "up", "down"),
            "start": runs["start"],
            "length": runs["length"],
            "censored": runs["censored"],
        }
    )


@export
def trace_stats(graph: DynamicGraph) -> TraceStats:
    """
    Measure the mean link lifetime and mean degree of a dynamic graph.

    Parameters
    ----------
    graph : DynamicGraph
        The dynamic graph

    Returns
    -------
    TraceStats
        Lifetime = mean length of the maximal up runs times tau
        (0 when no edge is ever up); degree = mean of 2|E_k|/N over
        snapshots.

    Notes
    -----
    Runs still up at the final snapshot are counted at their observed
    length and a warning reports how many there are.

    """
    runs = _run_table(graph)
    up_lengths = runs["length"][runs["up"]]
    censored = int(np.count_nonzero(runs["censored"] & runs["up"]))
    if censored:
        warnings.warn(
            f"{censored} of {up_lengths.size} contacts are still up at the final "
            + "snapshot and are counted at their observed length"
        )
    lifetime = float(up_lengths.mean()) * graph.tau if up_lengths.size else 0.0
    degree = 2.0 * np.count_nonzero(graph.states) / (len(graph) * graph.n_nodes)
    return TraceStats(
        n_nodes=graph.n_nodes,
        mean_link_lifetime=lifetime,
        mean_degree=degree,
        tau=graph.tau,
    )


@export
def duration_summary(
    graph: DynamicGraph, params: Optional[EdgeMarkovParams] = None
) -> pd.DataFrame:
    """
    Compare the contact duration distribution with the geometric law.

    Parameters
    ----------
    graph : DynamicGraph
        The dynamic graph
    params : Optional[EdgeMarkovParams], optional
        If given, a `geometric` column holds the model probability of
        each duration

    Returns
    -------
    pd.DataFrame
        One row per observed contact length (completed contacts only):
        length (steps), seconds, count, fraction (and geometric).

    """
    contacts = link_durations(graph)
    contacts = contacts[(contacts["state"] == "up") & ~contacts["censored"]]
    summary = (
        contacts.groupby("length").size().rename("count").reset_index()
        if not contacts.empty
        else pd.DataFrame({"length": pd.Series(dtype="int64"), "count": []})
    )
    summary["seconds"] = summary["length"] * graph.tau
    total = summary["count"].sum()
    summary["fraction"] = summary["count"] / total if total else np.nan
    if params is not None:
        summary["geometric"] = [
            duration_pmf(params, int(length), "up") for length in summary["length"]
        ]
    columns = ["length", "seconds", "count", "fraction"]
    if params is not None:
        columns.append("geometric")
    return summary[columns]


def _check_replay(
    graph: DynamicGraph, config: ReplayConfig
) -> Tuple[List[int], List[int]]:
    if graph.n_nodes < 2:
        raise ParameterError("Pair sampling needs at least two nodes")
    starts = config.batch_starts(graph.tau)
    delays = config.delay_steps(graph.tau)
    if config.horizon + max(config.delay_values) > graph.duration + _BUCKET_EPS:
        raise ParameterError(
            f"horizon + max delay = {config.horizon + max(config.delay_values)} s "
            + f"exceeds the trace duration of {graph.duration} s"
        )
    return starts, delays


def _batches(graph: DynamicGraph, config: ReplayConfig, starts: List[int]):
    """Yield (start step, sources, dests) for every injection batch."""
    rng = np.random.default_rng(config.seed)
    for start in starts:
        sources, dests = random_pairs(rng, graph.n_nodes, config.pairs_per_batch)
        yield start, sources, dests


@export
def replay_experiment(graph: DynamicGraph, config: ReplayConfig) -> pd.DataFrame:
    """
    Replay epidemic flooding on a trace.

    Every `injection_interval` seconds during the first `horizon`
    seconds, `pairs_per_batch` random source/destination pairs inject a
    bundle of each size in `alpha_values`.

    Parameters
    ----------
    graph : DynamicGraph
        Trace-derived dynamic graph
    config : ReplayConfig
        Replay settings

    Returns
    -------
    pd.DataFrame
        Experiment result table with one `replay` row per
        (alpha, delay), delay in seconds.

    Raises
    ------
    ParameterError
        If the trace is shorter than horizon + max delay, or a delay
        or the injection interval is not a multiple of tau.

    """
    starts, delays = _check_replay(graph, config)
    longest = max(delays)
    successes = np.zeros((len(config.alpha_values), len(delays)), dtype=np.int64)
    samples = 0
    for start, sources, dests in _batches(graph, config, starts):
        adjacency = graph.adjacency_stack(start, longest)
        for a_idx, alpha in enumerate(config.alpha_values):
            delivered = propagate(adjacency, sources, dests, graph.n_nodes, alpha)
            for d_idx, delay in enumerate(delays):
                successes[a_idx, d_idx] += np.count_nonzero(
                    (delivered >= 0) & (delivered < delay)
                )
        samples += len(sources)
        logger.debug("Replayed batch at snapshot %d", start)
    rows = [
        replay_row(graph.n_nodes, alpha, delay, successes[a_idx, d_idx], samples)
        for a_idx, alpha in enumerate(config.alpha_values)
        for d_idx, delay in enumerate(config.delay_values)
    ]
    logger.info("Replayed %d bundles per (alpha, delay)", samples)
    return make_result_table(rows)


@export
def component_ceiling(graph: DynamicGraph, config: ReplayConfig) -> pd.DataFrame:
    """
    Replay an infinitely small bundle that floods whole components.

    At every step each connected component holding a copy becomes
    fully infected. The result is the best delivery ratio epidemic
    routing can reach on the trace for each delay.

    Parameters
    ----------
    graph : DynamicGraph
        Trace-derived dynamic graph
    config : ReplayConfig
        Replay settings; `alpha_values` is not used. Pairs are the
        same as `replay_experiment` draws with this config.

    Returns
    -------
    pd.DataFrame
        Experiment result table with one `replay` row per delay and
        alpha set to 0.

    """
    starts, delays = _check_replay(graph, config)
    longest = max(delays)
    components = {}
    successes = np.zeros(len(delays), dtype=np.int64)
    samples = 0
    for start, sources, dests in _batches(graph, config, starts):
        for source, dest in zip(sources, dests):
            infected = {int(source)}
            delivered_at = None
            for offset in range(longest):
                step = start + offset
                if step not in components:
                    components[step] = list(
                        nx.connected_components(graph.snapshot_graph(step))
                    )
                for component in components[step]:
                    if not infected.isdisjoint(component):
                        infected |= component
                if int(dest) in infected:
                    delivered_at = offset
                    break
            if delivered_at is not None:
                successes += np.array([delivered_at < delay for delay in delays])
        samples += len(sources)
    rows = [
        replay_row(graph.n_nodes, 0.0, delay, successes[d_idx], samples)
        for d_idx, delay in enumerate(config.delay_values)
    ]
    return make_result_table(rows)
