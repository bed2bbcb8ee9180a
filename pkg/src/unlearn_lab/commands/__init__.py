##############################################################################
#
# Name: __init__.py
#
# Function:
#       CLI command classes for unlearn-lab
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from unlearn_lab.commands.base import BaseCommand, CommandError
from unlearn_lab.commands.config_cmd import ConfigCommand
from unlearn_lab.commands.eval_cmd import EvalCommand
from unlearn_lab.commands.export_cmd import ExportFeaturesCommand
from unlearn_lab.commands.forget_cmd import ForgetCommand
from unlearn_lab.commands.init_cmd import InitCommand
from unlearn_lab.commands.report_cmd import ReportCommand
from unlearn_lab.commands.sweep_cmd import SweepCommand
from unlearn_lab.commands.train_cmd import TrainCommand

__all__ = [
    "BaseCommand",
    "CommandError",
    "ConfigCommand",
    "EvalCommand",
    "ExportFeaturesCommand",
    "ForgetCommand",
    "InitCommand",
    "ReportCommand",
    "SweepCommand",
    "TrainCommand",
]
