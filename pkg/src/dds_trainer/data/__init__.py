# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

from .dataset import Dataset, LabeledExample
from .generators import gen_blobs, gen_group_shift, holdout_split, inject_label_noise
from .io import load_csv, save_csv

__all__ = [
    "Dataset",
    "LabeledExample",
    "gen_blobs",
    "gen_group_shift",
    "holdout_split",
    "inject_label_noise",
    "load_csv",
    "save_csv",
]

# EOF
