# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

from .classifier import MlpClassifier
from .group_scorer import GroupScorer
from .meta import LossModel, ParamLayout
from .scorer import ExampleScorer

__all__ = ["ExampleScorer", "GroupScorer", "LossModel", "MlpClassifier", "ParamLayout"]

# EOF
