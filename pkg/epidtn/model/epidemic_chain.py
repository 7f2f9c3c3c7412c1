# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Epidemic propagation Markov chain.

The chain tracks a single source/destination pair on an edge-Markovian
dynamic graph of N nodes. Apart from the absorbing `Succ` state (the
destination holds a copy) and the transient `Init` state (only the
source is infected), a state is a pair (i, j):

- i: nodes infected at the previous step or before
- j: nodes infected exactly at the current step

A just-infected node reaches a clean node during the next step with
probability pi_up (its links are in an unknown, stationary state), an
older infected node with probability p_up (its links to clean nodes are
known to be down). The dynamic matrix T, the static matrix R used for
extra hops within one step, and the bound matrices T_l and T_u all come
from the same row construction with different effective probabilities.

"""
from enum import Enum
from functools import lru_cache
import logging
from typing import Dict, List, Tuple, Union
import warnings

import attr
import numpy as np
from scipy.stats import binom

from ..common.exceptions import ParameterError
from ..common.utility import check_probability, export
from .edge_markov import EdgeMarkovParams, split_alpha
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9


@export
class StateKind(Enum):
    """Kinds of epidemic chain state."""

    init = 0
    pair = 1
    succ = 2


@export
@attr.s(auto_attribs=True, frozen=True)
class EpidemicState:
    """
    Epidemic chain state.

    `i` and `j` are only meaningful for `pair` states.
    """

    kind: StateKind
    i: int = 0
    j: int = 0

    @classmethod
    def init(cls) -> "EpidemicState":
        """Return the Init state."""
        return cls(StateKind.init)

    @classmethod
    def succ(cls) -> "EpidemicState":
        """Return the Succ state."""
        return cls(StateKind.succ)

    @classmethod
    def pair(cls, i: int, j: int) -> "EpidemicState":
        """Return the (i, j) state."""
        return cls(StateKind.pair, i, j)

    @property
    def label(self) -> str:
        """Return a printable label such as `Init` or `(1,0)`."""
        if self.kind == StateKind.init:
            return "Init"
        if self.kind == StateKind.succ:
            return "Succ"
        return f"({self.i},{self.j})"

    def __str__(self) -> str:
        """Return the state label."""
        return self.label


@export
class LowerBoundMode(Enum):
    """
    Substitution used for p_up in the alpha > 1 lower bound.

    `corrected` requires the link to come up and stay up:
    p_up * (1 - p_down)^(c - 1). `verbatim` uses p_up * p_down^(c - 1),
    capped at the upper bound value when p_down > 1/2.
    """

    corrected = 0
    verbatim = 1

    @classmethod
    def parse(cls, value: Union[str, "LowerBoundMode"]) -> "LowerBoundMode":
        """
        Convert string to enum.

        Parameters
        ----------
        value : Union[str, LowerBoundMode]
            value to parse

        Raises
        ------
        ParameterError
            If the value is not a known mode.

        """
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).strip().lower()]
        except KeyError as err:
            raise ParameterError(
                f"Unknown lower bound mode {value}. Valid values are "
                + ", ".join(mode.name for mode in cls)
            ) from err


@export
class MatrixKind(Enum):
    """Which propagation matrix a TransitionMatrix represents."""

    dynamic = "T"
    static = "R"
    lower = "T_l"
    upper = "T_u"


@export
@attr.s(auto_attribs=True, frozen=True, eq=False)
class TransitionMatrix:
    """
    Row-stochastic matrix over the canonical epidemic state ordering.

    Attributes
    ----------
    ordering : Tuple[EpidemicState, ...]
        Init first, pair states sorted by (i, j), Succ last.
    entries : np.ndarray
        Dense read-only square matrix.
    kind : MatrixKind
        Which propagation matrix this is.
    n_nodes : int
        Number of nodes N.

    """

    ordering: Tuple[EpidemicState, ...]
    entries: np.ndarray
    kind: MatrixKind = MatrixKind.dynamic
    n_nodes: int = 0

    @property
    def size(self) -> int:
        """Return the number of states."""
        return len(self.ordering)

    @property
    def succ_index(self) -> int:
        """Return the index of the Succ state."""
        return self.size - 1

    def index_of(self, state: EpidemicState) -> int:
        """Return the index of `state` in the ordering."""
        return _state_index(self.n_nodes)[state]

    def initial_vector(self) -> np.ndarray:
        """Return the unit row vector on Init."""
        vector = np.zeros(self.size)
        vector[0] = 1.0
        return vector

    def probability(self, source: EpidemicState, target: EpidemicState) -> float:
        """Return the transition probability from `source` to `target`."""
        return float(self.entries[self.index_of(source), self.index_of(target)])

    def to_frame(self):
        """Return the matrix as a labelled pandas DataFrame."""
        # pylint: disable=import-outside-toplevel
        import pandas as pd

        labels = [state.label for state in self.ordering]
        return pd.DataFrame(self.entries, index=labels, columns=labels)

    def check(self):
        """
        Check the stochastic matrix invariants.

        Raises
        ------
        ParameterError
            If entries are negative, a row does not sum to 1, Succ is not
            absorbing, Init is re-entered or a pair transition does not
            move the just-infected cohort into the earlier-infected set.

        """
        entries = self.entries
        if entries.shape != (self.size, self.size):
            raise ParameterError("Transition matrix is not square over its states")
        if (entries < 0).any():
            raise ParameterError("Transition matrix has negative entries")
        row_err = np.abs(entries.sum(axis=1) - 1.0).max()
        if row_err > ROW_SUM_TOLERANCE:
            raise ParameterError(f"Row sums deviate from 1 by {row_err}")
        if entries[self.succ_index, self.succ_index] != 1.0:
            raise ParameterError("Succ state is not absorbing")
        if entries[:, 0].any():
            raise ParameterError("Init state is re-entered")
        for row, source in enumerate(self.ordering):
            if source.kind != StateKind.pair:
                continue
            for col in np.flatnonzero(entries[row, :-1]):
                target = self.ordering[col]
                if target.kind != StateKind.pair or target.i != source.i + source.j:
                    raise ParameterError(
                        f"Invalid transition {source.label} -> {target.label}"
                    )


@export
def state_count(n_nodes: int) -> int:
    """Return 2 + N(N-1)/2, the number of chain states for N nodes."""
    return 2 + n_nodes * (n_nodes - 1) // 2


@export
def enumerate_states(n_nodes: int) -> List[EpidemicState]:
    """
    Return the chain states in canonical order.

    Parameters
    ----------
    n_nodes : int
        Number of nodes N (>= 2)

    Returns
    -------
    List[EpidemicState]
        Init, then (i, j) for 1 <= i <= N-1, 0 <= j <= N-1-i sorted
        lexicographically, then Succ.

    """
    return list(_ordering(n_nodes))


@lru_cache(maxsize=64)
def _ordering(n_nodes: int) -> Tuple[EpidemicState, ...]:
    if n_nodes < 2:
        raise ParameterError(f"n_nodes must be at least 2, got {n_nodes}")
    states = [EpidemicState.init()]
    for i in range(1, n_nodes):
        for j in range(0, n_nodes - i):
            states.append(EpidemicState.pair(i, j))
    states.append(EpidemicState.succ())
    return tuple(states)


@lru_cache(maxsize=64)
def _state_index(n_nodes: int) -> Dict[EpidemicState, int]:
    return {state: idx for idx, state in enumerate(_ordering(n_nodes))}


def _infect_prob(p: float, u: int) -> float:
    """Return 1 - (1 - p)^u, the chance a node is reached by one of u infectors."""
    return 1.0 - (1.0 - p) ** u


@export
def p_inf(m: int, p: float, u: int, w: int) -> float:
    """
    Return the probability that exactly m of w clean nodes get infected.

    Parameters
    ----------
    m : int
        Number of newly infected nodes (0 <= m <= w)
    p : float
        Probability that one infector reaches one clean node
    u : int
        Number of infectors
    w : int
        Number of clean nodes

    Returns
    -------
    float
        Binomial pmf of m successes out of w trials with success
        probability 1 - (1 - p)^u.

    Raises
    ------
    ParameterError
        If m is outside [0, w] or p is not a probability.

    """
    check_probability("p", p)
    if w < 0 or u < 0:
        raise ParameterError(f"u and w must be non-negative, got u={u}, w={w}")
    if not 0 <= m <= w:
        raise ParameterError(f"m must be in [0, {w}], got {m}")
    return float(binom.pmf(m, w, _infect_prob(p, u)))


@export
def p_succ(i: int, j: int, pi_down_eff: float, p_up_eff: float) -> float:
    """
    Return the probability of infecting the destination during the next step.

    Parameters
    ----------
    i : int
        Number of earlier-infected nodes
    j : int
        Number of just-infected nodes
    pi_down_eff : float
        Probability that a just-infected node's link to the destination
        is not usable
    p_up_eff : float
        Probability that an earlier-infected node's link to the
        destination becomes usable

    Returns
    -------
    float
        1 - pi_down_eff^j (1 - p_up_eff)^i

    """
    if i < 0 or j < 0:
        raise ParameterError(f"i and j must be non-negative, got i={i}, j={j}")
    return 1.0 - pi_down_eff ** j * (1.0 - p_up_eff) ** i


def _spread_distribution(w: int, q_new: float, q_old: float) -> np.ndarray:
    """
    Return the distribution of newly infected nodes among w clean nodes.

    Evaluates sum_m P_inf(m, .) * P_inf(j' - m, .) for every j': m nodes
    reached by the just-infected cohort (probability q_new each), then
    j' - m of the remaining w - m reached by earlier-infected nodes.
    Binomial trials beyond the available count have probability 0.
    """
    m = np.arange(w + 1)
    from_new = binom.pmf(m, w, q_new)
    from_old = binom.pmf(m[None, :], (w - m)[:, None], q_old)
    target = m[:, None] + m[None, :]
    valid = target <= w
    return np.bincount(
        target[valid], weights=(from_new[:, None] * from_old)[valid], minlength=w + 1
    )


def _fill_row(
    row: np.ndarray,
    n_nodes: int,
    i: int,
    j: int,
    rates: Tuple[float, float],
    static: bool,
):
    pi_up_eff, p_up_eff = rates
    index = _state_index(n_nodes)
    clean = n_nodes - 1 - i - j
    q_new = _infect_prob(pi_up_eff, j)
    if static:
        succ = p_succ(0, j, 1.0 - pi_up_eff, 0.0)
        spread = binom.pmf(np.arange(clean + 1), clean, q_new)
    else:
        succ = p_succ(i, j, 1.0 - pi_up_eff, p_up_eff)
        spread = _spread_distribution(clean, q_new, _infect_prob(p_up_eff, i))
    row[-1] = succ
    for j_next, prob in enumerate(spread):
        row[index[EpidemicState.pair(i + j, j_next)]] = (1.0 - succ) * prob


def _build(
    n_nodes: int, rates: Tuple[float, float], kind: MatrixKind
) -> TransitionMatrix:
    ordering = _ordering(n_nodes)
    size = len(ordering)
    logger.debug("Building %s matrix for N=%d (%d states)", kind.value, n_nodes, size)
    for name, value in zip(("pi_up_eff", "p_up_eff"), rates):
        check_probability(name, value)
    static = kind == MatrixKind.static
    entries = np.zeros((size, size))
    # Init propagates like a (0, 1) state
    _fill_row(entries[0], n_nodes, 0, 1, rates, static)
    for row, state in enumerate(ordering[1:-1], start=1):
        _fill_row(entries[row], n_nodes, state.i, state.j, rates, static)
    entries[-1, -1] = 1.0
    entries.setflags(write=False)
    return TransitionMatrix(
        ordering=ordering, entries=entries, kind=kind, n_nodes=n_nodes
    )


@export
def build_dynamic_matrix(params: EdgeMarkovParams, n_nodes: int) -> TransitionMatrix:
    """
    Build the one-hop-per-step transition matrix T.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N (>= 2)

    Returns
    -------
    TransitionMatrix
        Matrix over the canonical ordering; shared and read-only.

    """
    return _build_cached(n_nodes, (params.pi_up, params.p_up), MatrixKind.dynamic)


@export
def build_static_matrix(params: EdgeMarkovParams, n_nodes: int) -> TransitionMatrix:
    """
    Build the static propagation matrix R.

    Within one time step the topology is fixed: no link comes up, so
    only just-infected nodes spread (with probability pi_up) and states
    without just-infected nodes stay where they are.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N (>= 2)

    Returns
    -------
    TransitionMatrix
        Matrix over the canonical ordering; shared and read-only.

    """
    return _build_cached(n_nodes, (params.pi_up, params.p_up), MatrixKind.static)


@export
def effective_params_lower(
    params: EdgeMarkovParams,
    alpha: float,
    mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> Tuple[float, float]:
    """
    Return (pi_up_eff, p_up_eff) for the alpha > 1 lower bound.

    Only sufficiently long links present or coming up at the start of
    an interval of ceil(alpha) steps are counted.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    alpha : float
        Bundle size (> 1)
    mode : Union[str, LowerBoundMode], optional
        p_up substitution, by default corrected

    Returns
    -------
    Tuple[float, float]
        pi_up * (1 - p_down)^(c-1) and p_up * (1 - p_down)^(c-1)
        (corrected) or p_up * p_down^(c-1) (verbatim), c = ceil(alpha).
        The verbatim value is capped at the upper bound substitution.

    """
    intervals = _interval_length(alpha)
    mode = LowerBoundMode.parse(mode)
    survive = (1.0 - params.p_down) ** (intervals - 1)
    if mode == LowerBoundMode.corrected:
        p_up_eff = params.p_up * survive
    else:
        p_up_eff = params.p_up * params.p_down ** (intervals - 1)
        ceiling = _upper_rates(params, intervals)[1]
        if p_up_eff > ceiling:
            # only reachable with p_down > 1/2
            warnings.warn(
                f"Verbatim lower bound p_up_eff={p_up_eff} exceeds the upper "
                + f"bound value {ceiling} (p_down={params.p_down}); "
                + "using the upper value",
                UserWarning,
            )
            p_up_eff = ceiling
    return params.pi_up * survive, p_up_eff


@export
def effective_params_upper(
    params: EdgeMarkovParams, alpha: float
) -> Tuple[float, float]:
    """
    Return (pi_up_eff, p_up_eff) for the alpha > 1 upper bound.

    Any sufficiently long link that comes up during an interval is
    assumed to carry the whole bundle before the interval ends.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    alpha : float
        Bundle size (> 1)

    Returns
    -------
    Tuple[float, float]
        (pi_up + pi_down (1 - (1 - p_up)^(c-1))) (1 - p_down)^(c-1) and
        (1 - (1 - p_up)^c) (1 - p_down)^(c-1), c = ceil(alpha).

    """
    return _upper_rates(params, _interval_length(alpha))


def _upper_rates(params: EdgeMarkovParams, intervals: int) -> Tuple[float, float]:
    survive = (1.0 - params.p_down) ** (intervals - 1)
    pi_up_eff = (
        params.pi_up + params.pi_down * _infect_prob(params.p_up, intervals - 1)
    ) * survive
    p_up_eff = _infect_prob(params.p_up, intervals) * survive
    return pi_up_eff, p_up_eff


def _interval_length(alpha: float) -> int:
    if not alpha > 1:
        raise ParameterError(f"Bound substitutions need alpha > 1, got {alpha}")
    return split_alpha(alpha)[1]


@export
def build_bound_matrix(
    params: EdgeMarkovParams,
    n_nodes: int,
    alpha: float,
    bound: str,
    mode: Union[str, LowerBoundMode] = LowerBoundMode.corrected,
) -> TransitionMatrix:
    """
    Build T_l or T_u for bundles larger than the link size.

    Parameters
    ----------
    params : EdgeMarkovParams
        Edge parameters
    n_nodes : int
        Number of nodes N (>= 2)
    alpha : float
        Bundle size (> 1)
    bound : str
        "lower" or "upper"
    mode : Union[str, LowerBoundMode], optional
        Lower bound p_up substitution, by default corrected

    Returns
    -------
    TransitionMatrix
        One transition per interval of ceil(alpha) steps.

    """
    if bound == "lower":
        rates = effective_params_lower(params, alpha, mode)
        kind = MatrixKind.lower
    elif bound == "upper":
        rates = effective_params_upper(params, alpha)
        kind = MatrixKind.upper
    else:
        raise ParameterError(f"bound must be 'lower' or 'upper', got {bound}")
    return _build_cached(n_nodes, rates, kind)


@lru_cache(maxsize=128)
def _build_cached(
    n_nodes: int, rates: Tuple[float, float], kind: MatrixKind
) -> TransitionMatrix:
    return _build(n_nodes, rates, kind)
