##############################################################################
#
# Name: __init__.py
#
# Function:
#       Persistent model store and forget-request log
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.store.model_store import Action, LogEntry, ModelStore, StoreSnapshot

__all__ = ["Action", "LogEntry", "ModelStore", "StoreSnapshot"]
