# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Exception classes raised by epidtn."""
from typing import Optional

from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"


class EpidtnError(Exception):
    """Base class for epidtn exceptions."""


class ParameterError(EpidtnError, ValueError):
    """Raised when a model parameter, query or derived probability is invalid."""


class EstimationError(ParameterError):
    """Raised when trace statistics cannot be turned into model parameters."""


class ConfigError(EpidtnError):
    """Raised for missing or malformed configuration."""


class TraceFormatError(EpidtnError, ValueError):
    """Raised when a contact trace cannot be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        """
        Create a trace format error.

        Parameters
        ----------
        message : str
            Description of the problem.
        line_number : Optional[int], optional
            1-based line number of the offending record, by default None

        """
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
