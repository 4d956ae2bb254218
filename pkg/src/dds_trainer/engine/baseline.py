# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Plain uniform-weight trainer.

Draws its batches from the same ``train_batches`` stream and feeds them
through the same ``weighted_gradient`` as the DDS engine, so a DDS run with
a frozen zero-head scorer retraces this trainer exactly.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.data.dataset import Dataset
from dds_trainer.engine import optim
from dds_trainer.engine.dds import BatchSampler, init_theta, weighted_gradient
from dds_trainer.engine.optim import OptimizerState
from dds_trainer.lib.numeric import Rng, norm
from dds_trainer.models.classifier import MlpClassifier

if TYPE_CHECKING:
    from dds_trainer.config.run import RunConfig
    from dds_trainer.lib.utils import MetricsWriter

logger = get_logger(__name__)


@dataclass
class BaselineRunResult:
    theta: np.ndarray
    steps: int
    dev_loss: float
    dev_acc: float


def baseline_train(
    cfg: RunConfig,
    train: Dataset,
    dev: Dataset,
    metrics: MetricsWriter | None = None,
) -> BaselineRunResult:
    model = MlpClassifier(train.d, cfg.model.hidden, train.c)
    theta = init_theta(model, cfg.seed)
    state = OptimizerState.zeros(model.n_params)
    batches = BatchSampler(
        len(train), cfg.dds.batch_size, Rng(cfg.seed).stream("train_batches")
    )
    weights = np.full(cfg.dds.batch_size, 1.0 / cfg.dds.batch_size)
    logger.info(f"baseline: {model!r}, {cfg.dds.steps} steps")

    for t in range(1, cfg.dds.steps + 1):
        rows = batches.next()
        X, y = train.features[rows], train.labels[rows]
        train_loss = float(weights @ model.losses(theta, X, y))
        g_theta = weighted_gradient(model.per_example_grads(theta, X, y), weights)
        theta = optim.step(state, cfg.optimizer, theta, g_theta)

        row = {
            "step": t,
            "train_loss": train_loss,
            "dev_loss": model.mean_loss(theta, dev.features, dev.labels),
            "dev_acc": model.accuracy(theta, dev.features, dev.labels),
            "grad_norm_theta": norm(g_theta),
        }
        if metrics is not None:
            metrics.write(row)
        if t % cfg.log_every == 0:
            logger.info(f"step {t}: dev_loss={row['dev_loss']:.4f} dev_acc={row['dev_acc']:.4f}")

    return BaselineRunResult(
        theta=theta,
        steps=cfg.dds.steps,
        dev_loss=model.mean_loss(theta, dev.features, dev.labels),
        dev_acc=model.accuracy(theta, dev.features, dev.labels),
    )


# EOF
