# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
epidtn - epidemic routing on edge-Markovian dynamic graphs.

Analytic delivery ratios of epidemic (flooding) routing in
intermittently connected networks, with a Monte Carlo simulator and
contact trace replay to check them.

Sub-packages:

- common: configuration, exceptions and helpers
- model: edge-Markov parameters, epidemic Markov chain, delivery ratio
- sim: dynamic graphs, flooding simulation, trace replay
- experiments: result tables and parameter sweeps

"""
from ._version import VERSION

__version__ = VERSION
