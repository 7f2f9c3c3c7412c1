# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Miscellaneous helper methods."""
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Callable, Iterable, List, Optional

from .exceptions import ParameterError
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"


def export(func: Callable):
    """Decorate function or class to export to __all__."""
    mod = sys.modules[func.__module__]
    if hasattr(mod, "__all__"):
        all_list = getattr(mod, "__all__")
        all_list.append(func.__name__)
    else:
        all_list = [func.__name__]
        setattr(mod, "__all__", all_list)
    return func


@export
def string_empty(string: Optional[str]) -> bool:
    """Return True if the input string is None or whitespace."""
    return (string is None) or not (string and string.strip())


@export
def check_probability(name: str, value: float, allow_zero: bool = True) -> float:
    """
    Validate that `value` is a probability.

    Parameters
    ----------
    name : str
        Name of the quantity (used in the error message)
    value : float
        The value to check
    allow_zero : bool, optional
        If False, 0 is rejected, by default True

    Returns
    -------
    float
        The value as a float.

    Raises
    ------
    ParameterError
        If the value is NaN or outside [0, 1] (or (0, 1]).

    """
    try:
        value = float(value)
    except (TypeError, ValueError) as err:
        raise ParameterError(f"{name} must be a number, got {value!r}") from err
    if math.isnan(value) or value < 0 or value > 1:
        raise ParameterError(f"{name} must be in [0, 1], got {value}")
    if not allow_zero and value == 0:
        raise ParameterError(f"{name} must be strictly positive, got {value}")
    return value


@export
def parse_number_list(values: Any, value_type: Callable = float) -> List[Any]:
    """
    Convert a comma-separated string or iterable to a list of numbers.

    Fractions such as ``1/8`` are accepted.

    Parameters
    ----------
    values : Any
        A string like ``"0.25,1/2,1"``, a single number or an iterable.
    value_type : Callable, optional
        Conversion applied to each item, by default float

    Returns
    -------
    List[Any]
        The converted values in input order.

    """
    if isinstance(values, str):
        items: Iterable[Any] = [item.strip() for item in values.split(",")]
    elif isinstance(values, Iterable):
        items = values
    else:
        items = [values]
    result = []
    for item in items:
        if isinstance(item, str):
            if string_empty(item):
                continue
            if "/" in item:
                num, den = item.split("/", maxsplit=1)
                item = float(num) / float(den)
        number = float(item)
        if value_type is int:
            if not number.is_integer():
                raise ParameterError(f"Expected an integer value, got {item}")
            result.append(int(number))
        else:
            result.append(value_type(number))
    return result


def resolve_pkg_path(part_path: str) -> Optional[str]:
    """
    Resolve a path relative to the package.

    Parameters
    ----------
    part_path : str
        Absolute or relative path to resolve.

    """
    if Path(part_path).is_absolute():
        return part_path

    pkg_root = Path(__file__).resolve().parent.parent
    resolved_path = pkg_root.joinpath(part_path)
    if resolved_path.exists():
        return str(resolved_path)

    searched_paths = list(pkg_root.glob(str(Path("**").joinpath(part_path))))
    if not searched_paths or len(searched_paths) > 1:
        warnings.warn(f"{part_path} not found in the package or matched more than once")
        return None
    return str(searched_paths[0])
