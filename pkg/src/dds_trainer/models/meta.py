# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol

import numpy as np

from dds_trainer.lib.exceptions import NumericalError, ShapeError


@dataclass(frozen=True)
class ParamLayout:
    """Named blocks of a flat parameter vector, stored row-major in order."""

    blocks: tuple[tuple[str, tuple[int, ...]], ...]

    @cached_property
    def offsets(self) -> dict[str, slice]:
        offsets: dict[str, slice] = {}
        start = 0
        for name, shape in self.blocks:
            size = math.prod(shape)
            offsets[name] = slice(start, start + size)
            start += size
        return offsets

    @cached_property
    def size(self) -> int:
        return sum(math.prod(shape) for _, shape in self.blocks)

    def unpack(self, params: np.ndarray) -> dict[str, np.ndarray]:
        """Views of ``params`` reshaped per block."""

        if params.shape != (self.size,):
            raise ShapeError(
                f"parameter vector has shape {params.shape}, expected ({self.size},)"
            )
        return {
            name: params[self.offsets[name]].reshape(shape)
            for name, shape in self.blocks
        }

    def pack_rows(self, parts: dict[str, np.ndarray], rows: int) -> np.ndarray:
        """Concatenate per-row blocks of shape (rows, *block) into (rows, size)."""

        return np.concatenate(
            [parts[name].reshape(rows, -1) for name, _ in self.blocks], axis=1
        )

    def describe(self) -> str:
        return ", ".join(f"{name}{list(shape)}" for name, shape in self.blocks)


def check_params(params: np.ndarray, layout: ParamLayout, what: str) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (layout.size,):
        raise ShapeError(
            f"{what} has length {params.size}, expected {layout.size} ({layout.describe()})"
        )
    if not np.all(np.isfinite(params)):
        raise NumericalError(f"non-finite entries in {what}")
    return params


def check_inputs(X: np.ndarray, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != d:
        raise ShapeError(f"inputs have shape {X.shape}, expected (B, {d})")
    return X


class LossModel(Protocol):
    """What the reward and oracle code needs from a differentiable model."""

    n_params: int

    def losses(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        ...

    def per_example_grads(
        self, theta: np.ndarray, X: np.ndarray, y: np.ndarray
    ) -> np.ndarray:
        ...


# EOF
