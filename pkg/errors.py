#!/usr/bin/env python3
"""
errors.py - Exception hierarchy shared by the toolkit; each class carries its CLI exit code
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_INFEASIBLE = 4


class ToolkitError(Exception):
    """Base class for errors the CLI reports with a dedicated exit code"""
    exit_code = 1


class ConfigError(ToolkitError, ValueError):
    """Invalid configuration or parameter values"""
    exit_code = EXIT_CONFIG


class CapExceededError(ToolkitError):
    """Instance too large to materialize, decode or enumerate"""
    exit_code = EXIT_CAP


class InfeasibleInstanceError(ToolkitError):
    """Instance cannot run the requested scheme (e.g. KL + Lp < ML, J1 >= M for the baseline)"""
    exit_code = EXIT_INFEASIBLE
