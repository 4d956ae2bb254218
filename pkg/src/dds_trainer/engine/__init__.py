# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from typing import Any, Callable

from ..config.app import logger
from ..lib.exceptions import ConfigError

# name -> callable(cfg, train, dev, metrics) returning a run result
__engines__: dict[str, Callable[..., Any]] = {}


def set_engine(name: str, func: Callable[..., Any]) -> None:
    """Register the training function for an engine name.

    Args:
        name: The value of the ``engine`` config key.
        func: The training function.
    """
    __engines__[name] = func
    logger.debug(f"Engine {name!r} set to {func.__module__}.{func.__name__}")


def get_engine(name: str) -> Callable[..., Any]:
    """Return the training function registered for ``name``."""

    if name not in __engines__:
        raise ConfigError(
            f"No engine registered under {name!r}; known: {sorted(__engines__)}",
            path="engine",
        )
    return __engines__[name]


def register_default_engines() -> None:
    from .baseline import baseline_train
    from .dds import dds_train
    from .group import group_dds_train

    set_engine("dds", dds_train)
    set_engine("baseline", baseline_train)
    set_engine("group_dds", group_dds_train)


# EOF
