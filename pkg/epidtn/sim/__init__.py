# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Dynamic graph sampling, flooding simulation and trace replay."""
# flake8: noqa: F403
# pylint: disable=W0401
from .dynamic_graph import *
from .flooding import *
from .trace_replay import *

# pylint: enable=W0401

from .._version import VERSION

__version__ = VERSION
