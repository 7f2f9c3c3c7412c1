# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""
Package configuration reader.

Reads default configuration from package file `epidtnconfig.yaml`.
Optionally reads custom configuration from file specified in environment
variable `EPIDTNCONFIG`. If this is not defined the package will look for
a file `epidtnconfig.yaml` in the current directory.

Default settings are accessible as an attribute `default_settings`.
Custom settings are accessible as an attribute `custom_settings`.
Consolidated settings are accessible as an attribute `settings`.

"""
import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .exceptions import ConfigError
from .utility import resolve_pkg_path
from .._version import VERSION

__version__ = VERSION
__author__ = "epidtn contributors"

_CONFIG_FILE: str = "epidtnconfig.yaml"
_CONFIG_ENV_VAR: str = "EPIDTNCONFIG"

# pylint: disable=invalid-name
default_settings: Dict[str, Any] = {}
custom_settings: Dict[str, Any] = {}
settings: Dict[str, Any] = {}


def refresh_config():
    """Re-read the config settings."""
    # pylint: disable=global-statement
    global default_settings, custom_settings, settings
    default_settings = _get_default_config()
    custom_settings = _get_custom_config()
    settings = _consolidate_configs(default_settings, custom_settings)


def get_config(section: str, key: Optional[str] = None, default: Any = None) -> Any:
    """
    Return a setting from the consolidated configuration.

    Parameters
    ----------
    section : str
        Top-level section name (e.g. "ModelDefaults")
    key : Optional[str], optional
        Key within the section. If None the whole section is returned.
    default : Any, optional
        Value returned if the setting is missing, by default None

    Returns
    -------
    Any
        The setting value.

    """
    section_settings = settings.get(section) or {}
    if key is None:
        return section_settings
    value = section_settings.get(key)
    return default if value is None else value


def read_config_file(config_file: str) -> Dict[str, Any]:
    """
    Read a yaml config definition file.

    Parameters
    ----------
    config_file : str
        Path to yaml config file

    Returns
    -------
    Dict
        Configuration settings

    Raises
    ------
    ConfigError
        If the file content is not a yaml mapping.

    """
    if not Path(config_file).is_file():
        return {}
    with open(config_file, "r", encoding="utf-8") as f_handle:
        # use safe_load instead of load
        try:
            config = yaml.safe_load(f_handle)
        except yaml.YAMLError as err:
            raise ConfigError(f"Could not parse config file {config_file}") from err
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(f"Config file {config_file} must contain a mapping")
    return config


def _consolidate_configs(
    def_config: Dict[str, Any], cust_config: Dict[str, Any]
) -> Dict[str, Any]:
    resultant_config = deepcopy(def_config)
    _override_config(resultant_config, cust_config)
    return resultant_config


def _override_config(base_config: Dict[str, Any], new_config: Dict[str, Any]):
    for c_key, c_item in new_config.items():
        if c_item is None:
            continue
        if isinstance(base_config.get(c_key), dict) and isinstance(c_item, dict):
            _override_config(base_config[c_key], c_item)
        else:
            base_config[c_key] = c_item


def _get_default_config() -> Dict[str, Any]:
    conf_file = Path(__file__).resolve().parent.parent.joinpath(_CONFIG_FILE)
    if not conf_file.is_file():
        # fall back to searching the package tree
        found = resolve_pkg_path(_CONFIG_FILE)
        if not found:
            return {}
        conf_file = Path(found)
    return read_config_file(str(conf_file))


def _get_custom_config() -> Dict[str, Any]:
    config_path = os.environ.get(_CONFIG_ENV_VAR, None)
    if config_path and Path(config_path).is_file():
        return read_config_file(config_path)

    if Path(_CONFIG_FILE).is_file():
        return read_config_file(_CONFIG_FILE)
    return {}


# read initial config when first imported.
refresh_config()
