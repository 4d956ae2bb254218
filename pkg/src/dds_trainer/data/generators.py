# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Synthetic desk-scale datasets.

Class means sit on the cross-polytope lattice: class ``k`` has mean
``+scale * e_k`` for ``k < d`` and ``-scale * e_(k-d)`` for ``d <= k < 2d``,
so ``c <= 2 d`` is required. Samples are isotropic Gaussians around the
mean with standard deviation ``spread``.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import math
from collections.abc import Sequence

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.data.dataset import Dataset
from dds_trainer.lib.exceptions import DatasetError
from dds_trainer.lib.numeric import Rng

logger = get_logger(__name__)


def class_means(d: int, c: int, scale: float) -> np.ndarray:
    if c < 2:
        raise DatasetError(f"need c >= 2 classes, got {c}")
    if d < 1 or c > 2 * d:
        raise DatasetError(f"lattice needs c <= 2*d, got d={d}, c={c}")
    means = np.zeros((c, d))
    for k in range(c):
        if k < d:
            means[k, k] = scale
        else:
            means[k, k - d] = -scale
    return means


def gen_blobs(
    d: int,
    c: int,
    n_per_class: int | Sequence[int],
    spread: float,
    seed: int,
    scale: float = 5.0,
    rng: Rng | None = None,
) -> Dataset:
    """Gaussian blobs, class-major order, one mean per class.

    Draws from the ``data`` stream of ``seed`` unless another stream is given.
    """

    if isinstance(n_per_class, int):
        counts = [n_per_class] * c
    else:
        counts = [int(k) for k in n_per_class]
    if len(counts) != c or min(counts) < 1:
        raise DatasetError(f"n_per_class must give c={c} counts >= 1, got {n_per_class}")
    if spread < 0:
        raise DatasetError(f"spread must be >= 0, got {spread}")

    means = class_means(d, c, scale)
    rng = rng or Rng(seed).stream("data")
    features = []
    labels = []
    for k, count in enumerate(counts):
        noise = rng.normal((count, d), scale=1.0)
        features.append(means[k] + spread * noise)
        labels.append(np.full(count, k))

    return Dataset(
        features=np.concatenate(features),
        labels=np.concatenate(labels),
        groups=np.zeros(sum(counts), dtype=np.int64),
        corrupted=np.zeros(sum(counts), dtype=bool),
        c=c,
        n=1,
        provenance={
            "generator": "blobs",
            "d": d,
            "c": c,
            "n_per_class": counts,
            "spread": spread,
            "scale": scale,
            "seed": seed,
        },
    )


def inject_label_noise(ds: Dataset, rate: float, seed: int) -> Dataset:
    """Replace exactly round(rate * N) labels by a different, uniform class."""

    if not 0.0 <= rate <= 1.0:
        raise DatasetError(f"noise rate must be in [0, 1], got {rate}")
    total = len(ds)
    count = math.floor(rate * total + 0.5)
    if count == 0:
        return ds

    rng = Rng(seed).stream("noise")
    rows = np.sort(rng.choice(total, size=count, replace=False))
    # offset in [1, c-1] keeps the new label away from the old one
    offsets = rng.integers(ds.c - 1, size=count) + 1
    labels = ds.labels.copy()
    labels[rows] = (labels[rows] + offsets) % ds.c
    corrupted = ds.corrupted.copy()
    corrupted[rows] = True
    logger.debug(f"injected label noise into {count}/{total} examples")
    return ds.with_labels(
        labels, corrupted, label_noise={"rate": rate, "seed": seed, "count": count}
    )


def gen_group_shift(
    n: int,
    d: int,
    c: int,
    shift_scale: float,
    dev_group: int,
    seed: int,
    n_instances: int = 1000,
    n_dev: int = 200,
    spread: float = 1.0,
    scale: float = 5.0,
    availability_dropout: float = 0.0,
) -> tuple[Dataset, Dataset]:
    """Multi-source training set aligned on target instances, plus a dev set.

    Group ``g`` draws class ``k`` around ``mean_k + shift_scale * offset_g``
    where ``offset_g`` is a seeded random unit vector and
    ``offset_dev_group = 0``. Each target instance has one label and, for
    every available group, one feature vector of that label. Availability
    of each group is dropped with probability ``availability_dropout``,
    keeping at least one group per instance. The dev set is drawn from the
    ``dev_group`` distribution.
    """

    if n < 1 or not 0 <= dev_group < n:
        raise DatasetError(f"dev_group must lie in [0, {n}), got {dev_group}")
    if n_instances < 1 or n_dev < 1:
        raise DatasetError("n_instances and n_dev must be >= 1")
    if not 0.0 <= availability_dropout < 1.0:
        raise DatasetError("availability_dropout must be in [0, 1)")

    means = class_means(d, c, scale)
    rng = Rng(seed).stream("data")

    offsets = rng.normal((n, d))
    offsets /= np.linalg.norm(offsets, axis=1, keepdims=True)
    offsets[dev_group] = 0.0
    group_means = means[None, :, :] + shift_scale * offsets[:, None, :]

    labels = rng.integers(c, size=n_instances)
    available = rng.uniform_array(0.0, 1.0, (n_instances, n)) >= availability_dropout
    fallback = rng.integers(n, size=n_instances)
    for j in np.flatnonzero(~available.any(axis=1)):
        available[j, fallback[j]] = True
    noise = rng.normal((n_instances, n, d))

    features = []
    ex_labels = []
    ex_groups = []
    instances = np.full((n_instances, n), -1, dtype=np.int64)
    for j in range(n_instances):
        for g in range(n):
            if not available[j, g]:
                continue
            instances[j, g] = len(features)
            features.append(group_means[g, labels[j]] + spread * noise[j, g])
            ex_labels.append(labels[j])
            ex_groups.append(g)

    provenance = {
        "generator": "group_shift",
        "n": n,
        "d": d,
        "c": c,
        "shift_scale": shift_scale,
        "dev_group": dev_group,
        "n_instances": n_instances,
        "n_dev": n_dev,
        "spread": spread,
        "scale": scale,
        "availability_dropout": availability_dropout,
        "seed": seed,
    }
    train = Dataset(
        features=np.asarray(features),
        labels=np.asarray(ex_labels),
        groups=np.asarray(ex_groups),
        corrupted=np.zeros(len(features), dtype=bool),
        c=c,
        n=n,
        provenance=dict(provenance, split="train"),
        instances=instances,
    )

    dev_labels = rng.integers(c, size=n_dev)
    dev_noise = rng.normal((n_dev, d))
    dev = Dataset(
        features=group_means[dev_group, dev_labels] + spread * dev_noise,
        labels=dev_labels,
        groups=np.full(n_dev, dev_group),
        corrupted=np.zeros(n_dev, dtype=bool),
        c=c,
        n=n,
        provenance=dict(provenance, split="dev"),
    )
    return train, dev


def holdout_split(ds: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Move round(fraction * N) random examples into a disjoint dev set."""

    if not 0.0 < fraction < 1.0:
        raise DatasetError(f"holdout fraction must be in (0, 1), got {fraction}")
    total = len(ds)
    n_dev = math.floor(fraction * total + 0.5)
    if n_dev < 1 or n_dev >= total:
        raise DatasetError(f"holdout of {fraction} leaves an empty side of {total} examples")
    order = Rng(seed).stream("split").permutation(total)
    dev_rows = np.sort(order[:n_dev])
    train_rows = np.sort(order[n_dev:])
    return ds.subset(train_rows, tag="train"), ds.subset(dev_rows, tag="dev")


# EOF
