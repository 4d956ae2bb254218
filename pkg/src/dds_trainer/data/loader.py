# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from typing import TYPE_CHECKING

from dds_trainer.config.app import get_logger
from dds_trainer.data.dataset import Dataset
from dds_trainer.data.generators import (
    gen_blobs,
    gen_group_shift,
    holdout_split,
    inject_label_noise,
)
from dds_trainer.data.io import load_csv
from dds_trainer.lib.exceptions import ConfigError
from dds_trainer.lib.numeric import Rng

if TYPE_CHECKING:
    from dds_trainer.config.run import DataConfig

logger = get_logger(__name__)

# sub-stream of "data" for separately drawn blob dev sets
DEV_BLOBS_KEY = 1


def build_datasets(cfg: DataConfig, seed: int) -> tuple[Dataset, Dataset]:
    """Materialize the (train, dev) pair described by a ``data`` section.

    Label noise only ever touches the training side; the dev set stays clean.
    """

    match cfg.kind:
        case "blobs":
            full = gen_blobs(cfg.d, cfg.c, cfg.n_per_class, cfg.spread, seed, scale=cfg.scale)
            if cfg.dev_per_class is None:
                train, dev = holdout_split(full, cfg.dev_fraction, seed)
            else:
                # separate dev draw, e.g. a balanced dev set for imbalanced train data
                train = full
                dev = gen_blobs(
                    cfg.d,
                    cfg.c,
                    cfg.dev_per_class,
                    cfg.spread,
                    seed,
                    scale=cfg.scale,
                    rng=Rng(seed).stream("data").stream(DEV_BLOBS_KEY),
                )
        case "group_shift":
            train, dev = gen_group_shift(
                cfg.n_groups,
                cfg.d,
                cfg.c,
                cfg.shift_scale,
                cfg.dev_group,
                seed,
                n_instances=cfg.n_instances,
                n_dev=cfg.n_dev,
                spread=cfg.spread,
                scale=cfg.scale,
                availability_dropout=cfg.availability_dropout,
            )
        case "csv":
            if not cfg.path:
                raise ConfigError("Required when kind is 'csv'.", path="data.path")
            train = load_csv(cfg.path)
            if cfg.dev_path:
                dev = load_csv(cfg.dev_path)
            else:
                train, dev = holdout_split(train, cfg.dev_fraction, seed)
            if dev.d != train.d or dev.c != train.c:
                raise ConfigError(
                    f"dev set has d={dev.d}, c={dev.c}; train has d={train.d}, c={train.c}",
                    path="data.dev_path",
                )
        case _:
            raise ConfigError(f"Unknown data kind {cfg.kind!r}.", path="data.kind")

    if cfg.noise_rate > 0:
        train = inject_label_noise(train, cfg.noise_rate, seed)
    logger.info(
        f"data {cfg.kind}: {len(train)} train / {len(dev)} dev examples, "
        f"d={train.d}, c={train.c}, groups={train.n}"
    )
    return train, dev


# EOF
