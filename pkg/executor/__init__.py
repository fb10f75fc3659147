"""
Executor module initialization.

This module contains the command implementations and report formatting.
"""

from executor.commands import CommandResult, cmd_check_q, cmd_fit, cmd_oil, cmd_simulate
from executor.formatter import FormattedOutput, ReportFormatter

__all__ = [
    "CommandResult",
    "cmd_check_q",
    "cmd_fit",
    "cmd_oil",
    "cmd_simulate",
    "FormattedOutput",
    "ReportFormatter",
]
