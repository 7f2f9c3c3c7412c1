# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Setup script for epidtn."""

import re
import setuptools


INSTALL_REQUIRES = [
    "attrs>=19.1.0",
    "networkx>=2.2",
    "numpy>=1.17.0",
    "pandas>=0.25.0",
    "PyYAML>=5.1",
    "scipy>=1.3.0",
    "setuptools>=40.6.3",
]


# pylint: disable=locally-disabled, invalid-name
with open("README.md", "r") as fh:
    long_description = fh.read()

with open("epidtn/_version.py", "r") as fd:
    v_match = re.search(r'^VERSION\s*=\s*[\'"]([^\'"]*)[\'"]', fd.read(), re.MULTILINE)
    __version__ = v_match.group(1) if v_match else "no version"
# pylint: enable=locally-disabled, invalid-name

setuptools.setup(
    name="epidtn",
    version=__version__,
    author="epidtn contributors",
    description="Epidemic routing delivery ratio on edge-Markovian dynamic graphs",
    license="MIT License",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires=">=3.6",
    packages=setuptools.find_packages(exclude=["tests", "*.tests", "examples*"]),
    package_data={"epidtn": ["epidtnconfig.yaml"]},
    classifiers=[
        "Programming Language :: Python :: 3.6",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Development Status :: 4 - Beta",
        "Topic :: System :: Networking",
    ],
    install_requires=INSTALL_REQUIRES,
    entry_points={"console_scripts": ["epidtn=epidtn.cli:main"]},
    keywords=["dtn", "epidemic routing", "dynamic graphs", "markov chains"],
    zip_safe=False,
    include_package_data=True,
)
