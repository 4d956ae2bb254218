# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

from .fd import GradCheckReport, central_difference
from .gradcheck import (
    GradcheckResult,
    multi_step_markov_bias,
    one_step_bilevel_fd,
    run_gradcheck,
)
from .oracle import OracleResult, TinyProblem, brute_force_bilevel, run_oracle
from .taylor import TaylorScan, taylor_error_scan

__all__ = [
    "GradCheckReport",
    "GradcheckResult",
    "OracleResult",
    "TaylorScan",
    "TinyProblem",
    "brute_force_bilevel",
    "central_difference",
    "multi_step_markov_bias",
    "one_step_bilevel_fd",
    "run_gradcheck",
    "run_oracle",
    "taylor_error_scan",
]

# EOF
