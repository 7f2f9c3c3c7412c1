# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Analytic model: edge-Markov parameters and the epidemic chain."""
# flake8: noqa: F403
# pylint: disable=W0401
from .edge_markov import *
from .epidemic_chain import *
from .delivery import *

# pylint: enable=W0401

from .._version import VERSION

__version__ = VERSION
