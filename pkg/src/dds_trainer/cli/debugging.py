# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Helpers for ddsmgr CLI error reporting and debugging."""

from __future__ import annotations

from typing import Any, Optional

import click

from dds_trainer.config.app import IPDB_ENV, get_bool_env
from dds_trainer.lib.debugger import SelectiveDebugger
from dds_trainer.lib.exceptions import DDSError, handle_cli_exception

META_IPDB_FLAG = "ddsmgr_use_ipdb"


class DDSManagerGroup(click.Group):
    """Group that maps DDSError to exit codes and can drop into ipdb."""

    def invoke(self, ctx: click.Context) -> Any:  # type: ignore[override]
        try:
            return super().invoke(ctx)
        except DDSError as exc:
            if _should_enter_ipdb(ctx):
                _enter_ipdb(exc)
            ctx.exit(handle_cli_exception(exc))
        except Exception as exc:  # noqa: BLE001
            if _should_enter_ipdb(ctx):
                _enter_ipdb(exc)
            raise


def _should_enter_ipdb(ctx: click.Context) -> bool:
    flag_from_ctx = bool(ctx.meta.get(META_IPDB_FLAG, False))
    if flag_from_ctx:
        return True

    return get_bool_env(IPDB_ENV, False)


def _enter_ipdb(exc: BaseException) -> None:
    debugger = _load_ipdb()
    if debugger is None:
        click.echo("ipdb is not installed; reraising exception.", err=True)
        return

    click.echo("ipdb: entering post-mortem debugging session...", err=True)
    debugger.post_mortem(exc.__traceback__)


def _load_ipdb() -> Optional[SelectiveDebugger]:
    try:
        import ipdb  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        return None
    return SelectiveDebugger(ipdb)


# EOF
