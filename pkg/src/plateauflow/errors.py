"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed configuration, preset, or file schema (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A solver failed to produce a usable result (CLI exit code 3)."""


class BacktrackError(NumericalError):
    """Geodesic descent stalled or exceeded its step cap.

    Carries the partial path accumulated before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FormatError(ValueError):
    """A serialized artifact does not match its declared format."""
