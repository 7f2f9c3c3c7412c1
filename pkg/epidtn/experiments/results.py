# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Experiment result tables.

All experiment outputs share one DataFrame schema (RESULT_COLUMNS).
The `delay` column is in steps for analytic and Monte Carlo rows and
in seconds for replay rows. Helper functions project the table onto the
CSV layouts written by the command line tool.

"""
from typing import Any, Dict, Iterable, List, Optional, TextIO, Union

import numpy as np
import pandas as pd

from ..common.utility import export
from ..model.delivery import DeliveryResult, ResultKind
from ..model.edge_markov import EdgeMarkovParams
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

RESULT_COLUMNS = [
    "alpha",
    "delay",
    "n_nodes",
    "p_up",
    "p_down",
    "kind",
    "value",
    "lower",
    "upper",
    "std_error",
    "runs",
    "n_samples",
]

ANALYTIC_COLUMNS = [
    "alpha",
    "d",
    "N",
    "p_up",
    "p_down",
    "kind",
    "value_or_lower",
    "upper",
]
SIMULATE_COLUMNS = ANALYTIC_COLUMNS + ["runs", "std_error"]
REPLAY_COLUMNS = ["alpha", "delay_seconds", "delivery_ratio", "n_samples"]
REPLAY_BOUND_COLUMNS = REPLAY_COLUMNS + ["kind", "lower", "upper"]

FLOAT_FORMAT = "%.17g"


def _base_row(
    alpha: float, delay: float, n_nodes: int, params: Optional[EdgeMarkovParams]
) -> Dict[str, Any]:
    row = {col: np.nan for col in RESULT_COLUMNS}
    row.update(
        alpha=float(alpha),
        delay=delay,
        n_nodes=int(n_nodes),
        p_up=params.p_up if params else np.nan,
        p_down=params.p_down if params else np.nan,
    )
    return row


@export
def analytic_row(
    params: EdgeMarkovParams,
    n_nodes: int,
    alpha: float,
    delay: int,
    result: DeliveryResult,
) -> Dict[str, Any]:
    """Return a result row for an exact value or a pair of bounds."""
    row = _base_row(alpha, int(delay), n_nodes, params)
    row["kind"] = result.kind.value
    if result.kind == ResultKind.exact:
        row["value"] = result.value
    else:
        row["lower"] = result.lower
        row["upper"] = result.upper
    return row


@export
def montecarlo_row(
    params: EdgeMarkovParams,
    n_nodes: int,
    alpha: float,
    delay: int,
    ratio: float,
    std_error: float,
    runs: int,
) -> Dict[str, Any]:
    """Return a result row for a simulated delivery ratio."""
    row = _base_row(alpha, int(delay), n_nodes, params)
    row.update(kind="montecarlo", value=ratio, std_error=std_error, runs=int(runs))
    return row


@export
def replay_row(
    n_nodes: int, alpha: float, delay_seconds: float, successes: int, samples: int
) -> Dict[str, Any]:
    """Return a result row for a trace replay delivery ratio."""
    row = _base_row(alpha, float(delay_seconds), n_nodes, None)
    ratio = successes / samples if samples else np.nan
    row.update(
        kind="replay",
        value=ratio,
        std_error=np.sqrt(ratio * (1 - ratio) / samples) if samples else np.nan,
        n_samples=int(samples),
    )
    return row


@export
def make_result_table(rows: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """
    Build an experiment result table.

    Parameters
    ----------
    rows : Iterable[Dict[str, Any]]
        Rows as produced by the *_row helpers

    Returns
    -------
    pd.DataFrame
        Table with columns RESULT_COLUMNS, rows in input order.

    """
    return pd.DataFrame(list(rows), columns=RESULT_COLUMNS)


def _value_or_lower(table: pd.DataFrame) -> pd.Series:
    bounded = table["kind"] == ResultKind.bounded.value
    return table["value"].where(~bounded, table["lower"])


@export
def to_analytic_frame(
    table: pd.DataFrame, with_simulation: bool = False
) -> pd.DataFrame:
    """
    Project a result table onto the analytic/simulate CSV layout.

    Parameters
    ----------
    table : pd.DataFrame
        Experiment result table
    with_simulation : bool, optional
        Append the `runs` and `std_error` columns, by default False

    Returns
    -------
    pd.DataFrame
        Columns alpha, d, N, p_up, p_down, kind, value_or_lower, upper
        (+ runs, std_error).

    """
    frame = pd.DataFrame(
        {
            "alpha": table["alpha"],
            "d": table["delay"].astype("int64"),
            "N": table["n_nodes"].astype("int64"),
            "p_up": table["p_up"],
            "p_down": table["p_down"],
            "kind": table["kind"],
            "value_or_lower": _value_or_lower(table),
            "upper": table["upper"],
        }
    )
    if with_simulation:
        frame["runs"] = table["runs"].astype("Int64")
        frame["std_error"] = table["std_error"]
        return frame[SIMULATE_COLUMNS]
    return frame[ANALYTIC_COLUMNS]


@export
def to_replay_frame(table: pd.DataFrame, with_bounds: bool = False) -> pd.DataFrame:
    """
    Project a result table onto the replay CSV layout.

    Parameters
    ----------
    table : pd.DataFrame
        Experiment result table with replay rows (and analytic rows
        when `with_bounds` is set)
    with_bounds : bool, optional
        Keep analytic rows and add kind, lower and upper columns,
        by default False

    Returns
    -------
    pd.DataFrame
        Columns alpha, delay_seconds, delivery_ratio, n_samples
        (+ kind, lower, upper).

    """
    if not with_bounds:
        table = table[table["kind"] == "replay"]
    frame = pd.DataFrame(
        {
            "alpha": table["alpha"],
            "delay_seconds": table["delay"],
            "delivery_ratio": table["value"],
            "n_samples": table["n_samples"].astype("Int64"),
            "kind": table["kind"],
            "lower": table["lower"],
            "upper": table["upper"],
        }
    )
    columns: List[str] = REPLAY_BOUND_COLUMNS if with_bounds else REPLAY_COLUMNS
    return frame[columns].reset_index(drop=True)


@export
def write_csv(frame: pd.DataFrame, target: Union[str, TextIO]):
    """
    Write a table as CSV with full round-trip float precision.

    Parameters
    ----------
    frame : pd.DataFrame
        The table
    target : Union[str, TextIO]
        File path or open text stream

    """
    frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
