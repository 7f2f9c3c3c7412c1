# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Experiment result tables and parameter sweeps."""
from .._version import VERSION

__version__ = VERSION
