##############################################################################
#
# Name: __init__.py
#
# Function:
#       Configuration layers, schema validation and typed experiment settings
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.config.manager import ConfigManager
from unlearn_lab.config.validator import SchemaValidator, ValidationError

__all__ = ["ConfigManager", "SchemaValidator", "ValidationError"]
