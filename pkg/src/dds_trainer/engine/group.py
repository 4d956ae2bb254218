# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Group-level data selection over multiple source groups.

Each meta-round:

1. grad[S] is refreshed as the mean gradient of one fresh dev batch
2. K (group, example) pairs are drawn: a target instance uniformly, then a
   source group from g(. | availability; omega)
3. the model takes one step per ``model_batch`` pairs; every per-example
   gradient, clipped to norm G, is folded into its group's running average
   grad[S_i] <- alpha1 * grad[S_i] + alpha2 * grad
4. grad_vec[i] = cosine (or dot) of grad[S_i] and grad[S]
5. omega ascends (1/B) sum_j sum_i grad_vec[i] grad log g(i | a_j) for E
   iterations of B sampled instances
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.data.dataset import Dataset
from dds_trainer.engine import optim
from dds_trainer.engine.dds import BatchSampler, dev_gradient, init_theta, weighted_gradient
from dds_trainer.engine.optim import OptimizerConfig, OptimizerState
from dds_trainer.lib.exceptions import ConfigError, DatasetError, ShapeError
from dds_trainer.lib.numeric import Rng, categorical_sample, check_simplex, cosine, dot, norm
from dds_trainer.models.classifier import MlpClassifier
from dds_trainer.models.group_scorer import GroupScorer

if TYPE_CHECKING:
    from dds_trainer.config.run import RunConfig
    from dds_trainer.lib.utils import MetricsWriter

logger = get_logger(__name__)


@dataclass(frozen=True)
class GroupGradientTable:
    grads: np.ndarray
    """Running gradient average per source group, shape (n, P)."""
    alpha1: float
    alpha2: float
    grad_dev: np.ndarray | None = None
    """Gradient of the target group, shape (P,)."""

    def __post_init__(self) -> None:
        if self.grads.ndim != 2:
            raise ShapeError(f"gradient table must be 2-D, got {self.grads.shape}")
        if not (0.0 <= self.alpha1 <= 1.0 and self.alpha2 >= 0.0):
            raise ConfigError("need 0 <= alpha1 <= 1 and alpha2 >= 0", path="group_dds")
        if self.grad_dev is not None and self.grad_dev.shape != (self.grads.shape[1],):
            raise ShapeError(
                f"dev gradient has shape {self.grad_dev.shape}, "
                f"table entries have length {self.grads.shape[1]}"
            )

    @classmethod
    def zeros(cls, n: int, size: int, alpha1: float, alpha2: float) -> GroupGradientTable:
        return cls(grads=np.zeros((n, size)), alpha1=alpha1, alpha2=alpha2)

    @property
    def n(self) -> int:
        return self.grads.shape[0]

    def with_dev(self, grad_dev: np.ndarray) -> GroupGradientTable:
        return replace(self, grad_dev=np.asarray(grad_dev, dtype=np.float64))

    def norm_bound(self, clip_norm: float) -> float:
        """Steady-state bound alpha2 * G / (1 - alpha1) on every entry's norm."""

        if self.alpha1 >= 1.0:
            return float("inf")
        return self.alpha2 * clip_norm / (1.0 - self.alpha1)


@dataclass
class GroupRunResult:
    theta: np.ndarray
    omega: np.ndarray
    rounds: int
    dev_loss: float
    dev_acc: float
    initial_probs: list[float]
    final_probs: list[float]
    trace: list[list[float]] = field(default_factory=list)


def ema_update(table: GroupGradientTable, i: int, grad: np.ndarray) -> GroupGradientTable:
    if not 0 <= i < table.n:
        raise ShapeError(f"group index {i} out of range for {table.n} groups")
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != (table.grads.shape[1],):
        raise ShapeError(
            f"gradient has shape {grad.shape}, table entries have length {table.grads.shape[1]}"
        )
    grads = table.grads.copy()
    grads[i] = table.alpha1 * grads[i] + table.alpha2 * grad
    return replace(table, grads=grads)


def group_rewards(table: GroupGradientTable, metric: str = "cosine") -> np.ndarray:
    """grad_vec[i] = alignment of grad[S_i] with grad[S]."""

    if table.grad_dev is None:
        raise ShapeError("dev gradient of the table is not populated")
    match metric:
        case "cosine":
            align = cosine
        case "dot":
            align = dot
        case _:
            raise ConfigError("must be one of ('cosine', 'dot')", path="group_dds.metric")
    return np.array([align(row, table.grad_dev) for row in table.grads])


def clip_gradient(grad: np.ndarray, clip_norm: float) -> np.ndarray:
    size = norm(grad)
    if size > clip_norm:
        logger.debug(f"clipped gradient of norm {size:.3e} to {clip_norm}")
        return grad * (clip_norm / size)
    return grad


def load_data(
    scorer: GroupScorer,
    omega: np.ndarray,
    dataset: Dataset,
    K: int,
    rng: Rng,
) -> list[tuple[int, int]]:
    """Sample K (group, row) pairs: instance uniform, group from the scorer."""

    if K < 1:
        raise ConfigError(f"must be >= 1, got {K}", path="group_dds.K")
    if dataset.instances is None:
        raise DatasetError("group training needs an instance alignment table")
    m = dataset.instances.shape[0]
    if m == 0:
        raise DatasetError("dataset holds no target instances")
    chosen = rng.integers(m, size=K)
    probs = scorer.probs_batch(omega, dataset.availability[chosen])
    pairs = []
    for j, p in zip(chosen, probs):
        group = categorical_sample(p, rng)
        pairs.append((group, int(dataset.instances[j, group])))
    return pairs


def scorer_inner_loop(
    scorer: GroupScorer,
    omega: np.ndarray,
    state: OptimizerState,
    opt_cfg: OptimizerConfig,
    availability: np.ndarray,
    grad_vec: np.ndarray,
    E: int,
    B: int,
    rng: Rng,
) -> np.ndarray:
    """E ascent steps on the reward-weighted log-likelihood of the groups."""

    if E < 1 or B < 1:
        raise ConfigError("E and B must be >= 1", path="group_dds")
    availability = np.asarray(availability, dtype=np.float64)
    for _ in range(E):
        rows = rng.integers(availability.shape[0], size=B)
        d_omega = scorer.reward_weighted_grad(omega, availability[rows], grad_vec)
        omega = optim.step(state, opt_cfg, omega, -d_omega)
    return omega


def snapshot(scorer: GroupScorer, omega: np.ndarray) -> np.ndarray:
    """Group distribution under the all-available indicator."""

    return check_simplex(scorer.probs(omega, np.ones(scorer.n)))


def group_dds_train(
    cfg: RunConfig,
    train: Dataset,
    dev: Dataset,
    metrics: MetricsWriter | None = None,
) -> GroupRunResult:
    gcfg = cfg.group_dds
    n = gcfg.n or train.n
    if n != train.n:
        raise ConfigError(f"dataset has {train.n} groups, config says {n}", path="group_dds.n")
    if train.instances is None:
        raise DatasetError("group training needs an instance alignment table")
    if gcfg.prior_logits is not None and len(gcfg.prior_logits) != n:
        raise ConfigError(
            f"{len(gcfg.prior_logits)} logits for a dataset with {n} groups",
            path="group_dds.prior_logits",
        )

    seed = cfg.seed
    model = MlpClassifier(train.d, cfg.model.hidden, train.c)
    scorer = GroupScorer(n, gcfg.scorer_hidden)
    theta = init_theta(model, seed)
    omega = scorer.init_params(Rng(seed).stream("init_scorer"), gcfg.prior_logits)
    opt_theta = OptimizerState.zeros(model.n_params)
    opt_omega = OptimizerState.zeros(scorer.n_params)
    table = GroupGradientTable.zeros(n, model.n_params, gcfg.alpha1, gcfg.ema_alpha2)

    sampling = Rng(seed).stream("group_sampling")
    scorer_rng = Rng(seed).stream("scorer_batches")
    dev_batches = BatchSampler(len(dev), gcfg.dev_batch, Rng(seed).stream("dev_batches"))
    availability = train.availability

    initial = snapshot(scorer, omega)
    trace = []
    logger.info(
        f"group dds: {n} groups, {gcfg.rounds} rounds of K={gcfg.K}, E={gcfg.E}, "
        f"B={gcfg.B}, initial probs {np.round(initial, 4).tolist()}"
    )

    for r in range(1, gcfg.rounds + 1):
        dev_rows = dev_batches.next()
        table = table.with_dev(
            dev_gradient(model, theta, dev.features[dev_rows], dev.labels[dev_rows])
        )

        pairs = load_data(scorer, omega, train, gcfg.K, sampling)
        for start in range(0, len(pairs), gcfg.model_batch):
            chunk = pairs[start : start + gcfg.model_batch]
            rows = np.array([row for _, row in chunk])
            grads = model.per_example_grads(theta, train.features[rows], train.labels[rows])
            for (group, _), grad in zip(chunk, grads):
                table = ema_update(table, group, clip_gradient(grad, gcfg.clip_norm))
            weights = np.full(len(chunk), 1.0 / len(chunk))
            theta = optim.step(opt_theta, cfg.optimizer, theta, weighted_gradient(grads, weights))

        grad_vec = group_rewards(table, gcfg.metric)
        if not cfg.scorer.frozen:
            omega = scorer_inner_loop(
                scorer,
                omega,
                opt_omega,
                cfg.scorer.optimizer,
                availability,
                grad_vec,
                gcfg.E,
                gcfg.B,
                scorer_rng,
            )

        probs = snapshot(scorer, omega)
        trace.append(probs.tolist())
        row = {
            "round": r,
            "group_probs": probs.tolist(),
            "grad_vec": grad_vec.tolist(),
            "dev_loss": model.mean_loss(theta, dev.features, dev.labels),
            "dev_acc": model.accuracy(theta, dev.features, dev.labels),
        }
        if metrics is not None:
            metrics.write(row)
        logger.info(
            f"round {r}: probs={np.round(probs, 4).tolist()} "
            f"grad_vec={np.round(grad_vec, 4).tolist()} dev_acc={row['dev_acc']:.4f}"
        )

    return GroupRunResult(
        theta=theta,
        omega=omega,
        rounds=gcfg.rounds,
        dev_loss=model.mean_loss(theta, dev.features, dev.labels),
        dev_acc=model.accuracy(theta, dev.features, dev.labels),
        initial_probs=initial.tolist(),
        final_probs=snapshot(scorer, omega).tolist(),
        trace=trace,
    )


# EOF
