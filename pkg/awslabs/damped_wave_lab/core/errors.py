#!/usr/bin/env python3
# errors.py
"""
Exception hierarchy shared by the core modules and the harness
"""


class DampedWaveError(Exception):
    """Base class for every error raised by the lab"""


class ParameterRangeError(DampedWaveError, ValueError):
    """A numeric parameter lies outside the range an operation is defined on"""


class ResolutionError(DampedWaveError, ValueError):
    """The grid cannot resolve a requested feature"""


class TraceError(DampedWaveError):
    """A solution trace cannot support the requested post-processing"""


class ConfigurationError(DampedWaveError):
    """An experiment configuration is unreadable or inconsistent"""


class ExperimentError(DampedWaveError):
    """An experiment ran but cannot produce the claim it was asked for"""
