##############################################################################
#
# Name: __init__.py
#
# Function:
#       Tests package marker for unlearn_lab
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################
