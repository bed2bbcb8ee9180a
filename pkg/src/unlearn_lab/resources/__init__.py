##############################################################################
#
# Name: __init__.py
#
# Function:
#       Package resources for unlearn-lab (bundled JSON schemas)
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations
