#!/usr/bin/env python3
"""
Exception hierarchy for ctdne.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
InvariantViolation -> 3.
"""

from typing import Optional


class CTDNEError(Exception):
    """Base class for all ctdne errors"""


class ConfigError(CTDNEError, ValueError):
    """Invalid hyperparameters or command-line usage"""


class DataError(CTDNEError, ValueError):
    """Input data is malformed or insufficient for the requested operation"""


class EdgeListParseError(DataError):
    """A line of an edge-list file could not be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyGraphError(DataError):
    """Operation needs at least one edge"""


class WalkGenerationError(DataError):
    """Walk generation could not make progress towards its budget"""


class SplitError(DataError):
    """Train/test split produced no usable test pairs"""


class EmbeddingFormatError(DataError):
    """An embedding file is malformed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class InvariantViolation(CTDNEError, RuntimeError):
    """An internal invariant was broken; indicates a bug, not bad input"""
