# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Flat parameter checkpoints.

File layout, all little-endian::

    offset  size  field
    0       8     magic b"DDSPARAM"
    8       4     version (u32), currently 1
    12      4     length  (u32), number of float64 values
    16      8*N   values (float64)
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import struct

import fsspec
import numpy as np

from dds_trainer.lib.exceptions import CheckpointError

MAGIC = b"DDSPARAM"
VERSION = 1
_HEADER = struct.Struct("<8sII")


def encode_params(params: np.ndarray) -> bytes:
    values = np.ascontiguousarray(params, dtype="<f8").reshape(-1)
    return _HEADER.pack(MAGIC, VERSION, values.size) + values.tobytes()


def decode_params(blob: bytes) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise CheckpointError("checkpoint shorter than its header")
    magic, version, length = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    expected = _HEADER.size + 8 * length
    if len(blob) != expected:
        raise CheckpointError(
            f"checkpoint holds {len(blob)} bytes, header promises {expected}"
        )
    return np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).astype(np.float64)


def save_params(path: str, params: np.ndarray) -> None:
    with fsspec.open(path, "wb", auto_mkdir=True) as f:
        f.write(encode_params(params))


def load_params(path: str) -> np.ndarray:
    with fsspec.open(path, "rb") as f:
        return decode_params(f.read())


def read_header(path: str) -> dict[str, int | str]:
    with fsspec.open(path, "rb") as f:
        head = f.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise CheckpointError("checkpoint shorter than its header")
    magic, version, length = _HEADER.unpack(head)
    return {"magic": magic.decode("ascii", "replace"), "version": version, "length": length}


# EOF
