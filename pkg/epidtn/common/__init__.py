# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Common helpers: configuration, exceptions and utilities."""
# flake8: noqa: F403
from . import pkg_config
from .exceptions import (
    ConfigError,
    EpidtnError,
    EstimationError,
    ParameterError,
    TraceFormatError,
)

from .._version import VERSION

__version__ = VERSION
