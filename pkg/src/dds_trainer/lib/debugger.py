# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Post-mortem debugging for ddsmgr program faults."""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import sys
from dataclasses import dataclass, field
from typing import Any

from dds_trainer.config.app import get_logger
from dds_trainer.lib.exceptions import USER_ERRORS

logger = get_logger(__name__)


@dataclass
class SelectiveDebugger:
    """Open ``debugger.post_mortem`` for faults, never for bad input files.

    ``debugger`` is anything with a ``post_mortem(traceback)`` callable,
    normally the ipdb module.
    """

    debugger: Any
    excluded: tuple[type[BaseException], ...] = USER_ERRORS
    sessions: int = field(default=0, init=False)

    def wants(self, exc: BaseException | None) -> bool:
        return exc is not None and not isinstance(exc, self.excluded)

    def post_mortem(self, traceback=None) -> None:  # noqa: ANN001
        exc = sys.exc_info()[1]
        if not self.wants(exc):
            logger.debug(f"no post-mortem for {type(exc).__name__}")
            return
        logger.info(f"post-mortem on {type(exc).__name__}: {exc}")
        self.sessions += 1
        self.debugger.post_mortem(traceback)


# EOF
