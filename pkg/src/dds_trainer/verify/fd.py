# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Central finite differences and the comparison report built on them."""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.lib.exceptions import NumericalError, ShapeError

logger = get_logger(__name__)

# relative errors are taken against max(|analytic|, |fd|, FLOOR * scale) where
# scale is the largest entry of either vector
RELATIVE_FLOOR = 1e-5


def central_difference(
    func: Callable[[np.ndarray], float], x: np.ndarray, h: float
) -> np.ndarray:
    """(f(x + h e_k) - f(x - h e_k)) / 2h for every coordinate k."""

    if not h > 0:
        raise ValueError(f"step h must be > 0, got {h}")
    x0 = np.asarray(x, dtype=np.float64)
    grad = np.zeros(x0.size)
    for k in range(x0.size):
        x = x0.copy()
        x[k] = x0[k] + h
        fplus = func(x)
        x[k] = x0[k] - h
        fminus = func(x)
        if not (np.isfinite(fplus) and np.isfinite(fminus)):
            raise NumericalError(f"non-finite objective around coordinate {k}")
        grad[k] = (fplus - fminus) / (2 * h)
    return grad


@dataclass
class GradCheckReport:
    analytic: np.ndarray
    numeric: np.ndarray
    abs_error: np.ndarray
    rel_error: np.ndarray
    max_rel_error: float
    tolerance: float
    passed: bool
    label: str = ""

    @classmethod
    def compare(
        cls, analytic: np.ndarray, numeric: np.ndarray, tolerance: float, label: str = ""
    ) -> GradCheckReport:
        analytic = np.asarray(analytic, dtype=np.float64)
        numeric = np.asarray(numeric, dtype=np.float64)
        if analytic.shape != numeric.shape:
            raise ShapeError(f"analytic {analytic.shape} vs numeric {numeric.shape}")
        abs_error = np.abs(analytic - numeric)
        scale = max(
            float(np.max(np.abs(analytic), initial=0.0)),
            float(np.max(np.abs(numeric), initial=0.0)),
        )
        denom = np.maximum(
            np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_FLOOR * scale
        )
        rel_error = np.divide(abs_error, denom, out=np.zeros_like(abs_error), where=denom > 0)
        max_rel = float(np.max(rel_error, initial=0.0))
        report = cls(
            analytic=analytic,
            numeric=numeric,
            abs_error=abs_error,
            rel_error=rel_error,
            max_rel_error=max_rel,
            tolerance=tolerance,
            passed=max_rel <= tolerance,
            label=label,
        )
        logger.debug(f"gradcheck {label}: max rel error {max_rel:.3e} (tol {tolerance:.1e})")
        return report

    def as_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "analytic": self.analytic.tolist(),
            "numeric": self.numeric.tolist(),
            "abs_error": self.abs_error.tolist(),
            "rel_error": self.rel_error.tolist(),
            "max_rel_error": self.max_rel_error,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


# EOF
