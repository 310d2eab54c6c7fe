"""Shared exception types.

Every error raised by this package derives from RaseSimError and carries a
``stage`` attribute naming the lifecycle stage that failed; the CLI prints it
as ``error: <stage>: <message>``.
"""


class RaseSimError(Exception):
    """Base class for all errors raised by rasesim."""

    stage = "run"


class ConfigError(RaseSimError):
    """Invalid, unreadable, or inconsistent experiment configuration."""

    stage = "config"


class IoError(RaseSimError):
    """Failed to read or write a report artifact."""

    stage = "io"
