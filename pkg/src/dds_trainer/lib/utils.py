# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import fsspec
import numpy as np
from litestar.serialization import encode_json

PACKAGE_NAME = "dds-trainer"


def resources_to_paths(resources: list[str]) -> list[Path]:
    """Convert a list of resources to paths.

    Args:
        resources: A list of resource strings, either plain paths or
            ``module:relative/path`` names inside an importable package.

    Returns:
        A list of paths.
    """

    paths = []
    for resource in resources:
        if ":" in resource:
            module, directory = resource.split(":", 1)
            # import module, and get its __file__ attribute
            mod = __import__(module, fromlist=["__file__"])
            path = Path(mod.__file__).parent
            if directory:
                path = path / directory
            paths.append(path)
        else:
            paths.append(Path(resource))

    return paths


def package_version() -> str:
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        return "0.0.0"


def provenance_string(config_digest: str) -> str:
    """``dds-trainer@<version>+cfg.<first 12 hex digits of the config sha256>``."""

    return f"{PACKAGE_NAME}@{package_version()}+cfg.{config_digest[:12]}"


def _default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot encode {type(obj).__name__}")


def to_json(data: Any) -> bytes:
    return encode_json(data, serializer=_default)


def join_path(directory: str, name: str) -> str:
    return f"{directory.rstrip('/')}/{name}"


def write_json(path: str, data: Any) -> None:
    with fsspec.open(path, "wb", auto_mkdir=True) as f:
        f.write(to_json(data))
        f.write(b"\n")


class MetricsWriter:
    """Append-only JSON Lines sink, one record per call to ``write``.

    The file is created (and truncated) when the writer is opened, so a run
    with zero steps still leaves an empty metrics file behind.
    """

    def __init__(self, path: str | None) -> None:
        self.path = path
        self.records = 0
        self._file = None
        self._last_step: int | None = None

    def __enter__(self) -> MetricsWriter:
        if self.path is not None:
            self._file = fsspec.open(self.path, "wb", auto_mkdir=True).open()
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()

    def write(self, record: dict[str, Any]) -> None:
        step = record.get("step", record.get("round"))
        if step is not None and self._last_step is not None and step <= self._last_step:
            raise ValueError(f"metrics step {step} does not increase past {self._last_step}")
        self._last_step = step
        self.records += 1
        if self._file is not None:
            self._file.write(to_json(record))
            self._file.write(b"\n")

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None


# EOF
