##############################################################################
#
# Name: __version__.py
#
# Function:
#       Provide package version from pyproject.toml metadata
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from unlearn_lab.metadata import DISTRIBUTION_NAME

DEVELOPMENT_VERSION = "0.1.0.dev0"

try:
    __version__ = version(DISTRIBUTION_NAME)
except PackageNotFoundError:
    # running from a source checkout
    __version__ = DEVELOPMENT_VERSION
