# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# This file does only contain a selection of the most common options. For a
# full list see the documentation:
# http://www.sphinx-doc.org/en/master/config

# -- Path setup --------------------------------------------------------------

import os
import re
import sys

sys.path.insert(0, os.path.abspath("../.."))

# -- Project information -----------------------------------------------------

project = "epidtn"
copyright = "2026, epidtn contributors"
author = "epidtn contributors"


def _read_version():
    ver_file = os.path.join(
        os.path.dirname(__file__), "..", "..", "epidtn", "_version.py"
    )
    with open(ver_file, "r") as file_handle:
        match = re.search(r'VERSION\s?=\s?"([\d.]+)"', file_handle.read())
    return match.group(1) if match else ""


# The full version, including alpha/beta/rc tags
release = _read_version()
version = ".".join(release.split(".")[:2])

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.coverage",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"
language = None
exclude_patterns = []
pygments_style = None

# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_static_path = []
htmlhelp_basename = "epidtndoc"

# -- Options for manual page output ------------------------------------------

man_pages = [(master_doc, "epidtn", "epidtn Documentation", [author], 1)]

# -- Extension configuration -------------------------------------------------

autodoc_default_options = {
    "members": None,
    "inherited-members": None,
    "ignore-module-all": None,
}
autoclass_content = "both"
