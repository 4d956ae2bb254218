# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from dds_trainer.lib.exceptions import DatasetError


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray
    label: int
    group: int = 0
    instance: int = -1
    """Target instance the example is aligned to, -1 when not aligned."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented, immutable set of labeled examples.

    ``corrupted`` marks examples whose label was replaced by injected noise;
    it is ground truth for evaluation and never reaches a scorer.
    ``instances`` is the optional alignment table of group-structured data:
    ``instances[j, g]`` is the row of the example from group ``g`` aligned
    to target instance ``j``, or -1 when that group has none.
    """

    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    corrupted: np.ndarray
    c: int
    n: int = 1
    provenance: dict[str, Any] = field(default_factory=dict)
    instances: np.ndarray | None = None

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise DatasetError(f"features must be 2-D, got shape {features.shape}")
        size = features.shape[0]
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        groups = np.array(self.groups, dtype=np.int64).reshape(-1)
        corrupted = np.array(self.corrupted, dtype=bool).reshape(-1)
        for name, column in (("labels", labels), ("groups", groups), ("corruption mask", corrupted)):
            if column.shape != (size,):
                raise DatasetError(f"{name} has {column.size} entries for {size} examples")
        if not np.all(np.isfinite(features)):
            raise DatasetError("features contain non-finite values")
        if self.c < 2:
            raise DatasetError(f"need at least 2 classes, got {self.c}")
        if size and (labels.min() < 0 or labels.max() >= self.c):
            raise DatasetError(f"labels must lie in [0, {self.c})")
        if size and (groups.min() < 0 or groups.max() >= self.n):
            raise DatasetError(f"group ids must lie in [0, {self.n})")
        for arr in (features, labels, groups, corrupted):
            arr.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "corrupted", corrupted)
        if self.instances is not None:
            instances = np.array(self.instances, dtype=np.int64)
            if instances.ndim != 2 or instances.shape[1] != self.n:
                raise DatasetError(
                    f"alignment table has shape {instances.shape}, expected (m, {self.n})"
                )
            if np.any(instances >= size) or np.any(instances < -1):
                raise DatasetError("alignment table points outside the dataset")
            instances.flags.writeable = False
            object.__setattr__(self, "instances", instances)

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]

    def __getitem__(self, i: int) -> LabeledExample:
        return LabeledExample(
            features=self.features[i],
            label=int(self.labels[i]),
            group=int(self.groups[i]),
            instance=self._instance_of(i),
        )

    def _instance_of(self, i: int) -> int:
        if self.instances is None:
            return -1
        hits = np.argwhere(self.instances == i)
        return int(hits[0, 0]) if hits.size else -1

    @property
    def availability(self) -> np.ndarray:
        """0/1 indicator per target instance, shape (m, n)."""

        if self.instances is None:
            raise DatasetError("dataset has no instance alignment")
        return (self.instances >= 0).astype(np.float64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.c)

    def subset(self, rows: np.ndarray, tag: str | None = None) -> Dataset:
        """Rows in the given order; the alignment table is not carried over."""

        rows = np.asarray(rows, dtype=np.int64)
        provenance = dict(self.provenance)
        if tag:
            provenance["subset"] = tag
        return Dataset(
            features=self.features[rows],
            labels=self.labels[rows],
            groups=self.groups[rows],
            corrupted=self.corrupted[rows],
            c=self.c,
            n=self.n,
            provenance=provenance,
        )

    def with_labels(
        self, labels: np.ndarray, corrupted: np.ndarray, **provenance: Any
    ) -> Dataset:
        return replace(
            self,
            labels=labels,
            corrupted=corrupted,
            provenance={**self.provenance, **provenance},
        )

    def equals(self, other: Dataset) -> bool:
        if not isinstance(other, Dataset):
            return False
        same_alignment = (self.instances is None and other.instances is None) or (
            self.instances is not None
            and other.instances is not None
            and np.array_equal(self.instances, other.instances)
        )
        return (
            self.c == other.c
            and self.n == other.n
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.groups, other.groups)
            and np.array_equal(self.corrupted, other.corrupted)
            and same_alignment
        )


# EOF
