# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from dds_trainer.engine.dds import taylor_rewards
from dds_trainer.lib.exceptions import ShapeError
from dds_trainer.models.meta import LossModel


@dataclass
class TaylorScan:
    eps: list[float]
    max_abs_error: list[float]
    """max_i |taylor r_i - exact r_i| for each eps."""
    max_rel_error: list[float]
    """max_abs_error divided by max_i |exact r_i|."""
    slope: float | None
    """Least-squares slope of log error against log eps; None if any error is 0."""

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def taylor_error_scan(
    model: LossModel,
    theta: np.ndarray,
    v: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    eps_list: Sequence[float],
) -> TaylorScan:
    """Compare first-order Taylor rewards with exact dot products over eps."""

    eps_values = [float(e) for e in eps_list]
    if not eps_values or any(e <= 0 for e in eps_values):
        raise ShapeError("eps values must be positive")
    if any(a <= b for a, b in zip(eps_values, eps_values[1:])):
        raise ShapeError("eps values must be strictly descending")

    v = np.asarray(v, dtype=np.float64)
    exact = model.per_example_grads(theta, X, y) @ v
    scale = float(np.max(np.abs(exact), initial=0.0))

    abs_errors = []
    for eps in eps_values:
        approx = taylor_rewards(model, theta, v, X, y, eps)
        abs_errors.append(float(np.max(np.abs(approx - exact))))
    rel_errors = [e / scale if scale > 0 else 0.0 for e in abs_errors]

    slope = None
    if len(eps_values) >= 2 and all(e > 0 for e in abs_errors):
        slope = float(np.polyfit(np.log(eps_values), np.log(abs_errors), 1)[0])

    return TaylorScan(
        eps=eps_values,
        max_abs_error=abs_errors,
        max_rel_error=rel_errors,
        slope=slope,
    )


# EOF
