# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import click


class DDSError(Exception):
    """Base class for all errors raised by dds-trainer.

    Every subclass carries the process exit code that ``ddsmgr`` uses when
    the error escapes a command.
    """

    exit_code: int = 1

    def __init__(self, message: str, *, path: str | None = None) -> None:
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class ConfigError(DDSError):
    """Config schema violation; ``path`` is the dotted key path."""

    exit_code = 2


class DatasetError(DDSError):
    """Malformed dataset input (CSV rows, sidecars, generator arguments)."""

    exit_code = 2

    def __init__(
        self, message: str, *, path: str | None = None, line: int | None = None
    ) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, path=path)


class ShapeError(DDSError, ValueError):
    """Length or dimension mismatch between vectors, parameters and inputs."""


class NumericalError(DDSError, ArithmeticError):
    """A NaN/Inf appeared, or a distribution left the probability simplex."""


class ConvergenceError(NumericalError):
    """Inner solver did not reach its tolerance."""


class CheckpointError(DDSError):
    """Parameter checkpoint with bad magic, version or length."""


# exceptions that are user mistakes rather than program faults
USER_ERRORS: tuple[type[BaseException], ...] = (ConfigError, DatasetError)


def handle_cli_exception(exc: DDSError) -> int:
    """Report a DDSError on stderr and return the exit code to use."""

    click.echo(f"error: {exc}", err=True)
    return exc.exit_code


# EOF
