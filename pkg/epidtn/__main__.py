# -------------------------------------------------------------------------
# Copyright (c) epidtn contributors. All rights reserved.
# Licensed under the MIT License. See License.txt in the project root for
# license information.
# --------------------------------------------------------------------------
"""Run the epidtn command line with `python -m epidtn`."""
import sys

from .cli import main

sys.exit(main())
