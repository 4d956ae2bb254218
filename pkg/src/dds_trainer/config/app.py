# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

import os

from litestar.logging import LoggingConfig

LOG_LEVEL_ENV = "DDS_LOG_LEVEL"
IPDB_ENV = "DDS_CLI_IPDB"

_LOG_LEVELS = {
    "error": "ERROR",
    "warning": "WARNING",
    "info": "INFO",
    "debug": "DEBUG",
}


def get_env(var_name: str, default: str) -> str:
    return os.getenv(var_name, default)


def get_bool_env(var_name: str, default: bool) -> bool:
    value = os.getenv(var_name)
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "yes", "on"}


def get_log_level() -> str:
    """Map DDS_LOG_LEVEL (error/info/debug) to a logging level name."""

    raw = get_env(LOG_LEVEL_ENV, "info").strip().lower()
    return _LOG_LEVELS.get(raw, "INFO")


logging_config = LoggingConfig(
    root={"level": get_log_level(), "handlers": ["queue_listener"]},
)

# Use the .configure() method to get a logger factory
logger = logging_config.configure()("dds-trainer")

if get_env(LOG_LEVEL_ENV, "info").strip().lower() not in _LOG_LEVELS:
    logger.warning(
        f"unknown {LOG_LEVEL_ENV}={os.getenv(LOG_LEVEL_ENV)!r}, using 'info'"
    )


def get_logger(name: str):
    """Child logger of the package logger for a module."""

    return logger.getChild(name.removeprefix("dds_trainer."))


# EOF
