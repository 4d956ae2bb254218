# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Per-example data selection for classification.

One training step, in this order:

1. weights = within-batch softmax of the scorer over the train batch
2. g_theta = sum_i weights_i * grad loss_i(theta); theta' = optimizer step
3. d_theta = mean dev-batch gradient at theta'
4. reward r_i = d_theta . (kernel * grad loss_i(theta)), the gradient taken
   at the pre-step theta, or its first-order Taylor estimate
5. d_psi = sum_i c_i * r_i * grad_psi log weights_i with c_i = 1/B
   (``uniform``) or c_i = weights_i (``scorer``)
6. psi' = scorer optimizer step along +d_psi

With ``scorer`` coefficients d_psi is exactly minus the derivative of the
post-step dev loss with respect to psi for SGD and momentum; with
``uniform`` coefficients the two agree while the scorer weights are uniform.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.data.dataset import Dataset
from dds_trainer.engine import optim
from dds_trainer.engine.optim import OptimizerConfig, OptimizerState
from dds_trainer.lib.exceptions import ConfigError, NumericalError, ShapeError
from dds_trainer.lib.numeric import (
    Rng,
    check_finite,
    cosine,
    dot,
    entropy,
    kl_divergence,
    norm,
    softmax,
)
from dds_trainer.models.classifier import MlpClassifier
from dds_trainer.models.meta import check_inputs
from dds_trainer.models.scorer import ExampleScorer

if TYPE_CHECKING:
    from dds_trainer.config.run import DdsConfig, RunConfig
    from dds_trainer.lib.utils import MetricsWriter

logger = get_logger(__name__)

REWARD_METRICS = ("dot", "cosine")
WEIGHTINGS = ("uniform", "scorer")


@dataclass
class DdsStepReport:
    step: int
    train_loss: float
    """Scorer-weighted train batch loss at the pre-step theta."""
    dev_loss: float
    """Mean dev batch loss at the post-step theta."""
    rewards: np.ndarray
    weights: np.ndarray
    grad_norm_theta: float
    grad_norm_dev: float
    grad_norm_psi: float
    d_psi: np.ndarray | None = None
    """Scorer ascent direction, whether or not it was applied."""

    def __post_init__(self) -> None:
        values = [self.train_loss, self.dev_loss, self.grad_norm_theta]
        values += [self.grad_norm_dev, self.grad_norm_psi]
        if not (
            np.all(np.isfinite(values))
            and np.all(np.isfinite(self.rewards))
            and np.all(np.isfinite(self.weights))
        ):
            raise NumericalError(f"non-finite value recorded at step {self.step}")
        if np.any(self.weights < 0) or abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise NumericalError(f"scorer weights left the simplex at step {self.step}")

    @property
    def mean_reward(self) -> float:
        return float(np.mean(self.rewards))

    @property
    def weights_entropy(self) -> float:
        return entropy(self.weights)


@dataclass
class DdsState:
    """Everything a step reads and advances."""

    theta: np.ndarray
    psi: np.ndarray
    opt_theta: OptimizerState
    opt_psi: OptimizerState
    t: int = 0


@dataclass
class WeightReport:
    """Scorer weights over the full training set at the end of a run."""

    mean_weight_corrupted: float | None
    mean_weight_clean: float | None
    corrupted_clean_ratio: float | None
    raw_class_distribution: list[float]
    weighted_class_distribution: list[float]
    raw_kl_to_uniform: float
    weighted_kl_to_uniform: float

    def as_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class DdsRunResult:
    theta: np.ndarray
    psi: np.ndarray
    steps: int
    dev_loss: float
    dev_acc: float
    weight_report: WeightReport
    phase_dev_acc: dict[int, float] = field(default_factory=dict)


class BatchSampler:
    """Uniform minibatches of row indices from one owned stream.

    Rows are drawn without replacement inside a batch when the dataset is
    large enough, with replacement otherwise.
    """

    def __init__(self, size: int, batch_size: int, rng: Rng) -> None:
        if size < 1:
            raise ShapeError("cannot sample batches from an empty dataset")
        if batch_size < 1:
            raise ShapeError(f"batch size must be >= 1, got {batch_size}")
        self.size = size
        self.batch_size = batch_size
        self.rng = rng

    def next(self) -> np.ndarray:
        if self.batch_size <= self.size:
            return self.rng.choice(self.size, size=self.batch_size, replace=False)
        return self.rng.integers(self.size, size=self.batch_size)


def dev_gradient(
    model: MlpClassifier, theta: np.ndarray, X: np.ndarray, y: np.ndarray
) -> np.ndarray:
    """Arithmetic mean of the per-example dev gradients at ``theta``."""

    X = check_inputs(X, model.d)
    if X.shape[0] == 0:
        raise ShapeError("dev batch is empty")
    return model.mean_grad(theta, X, y)


def weighted_gradient(grads: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_i weights[i] * grads[i], accumulated in row order."""

    grads = np.asarray(grads, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if grads.ndim != 2 or weights.shape != (grads.shape[0],):
        raise ShapeError(f"{weights.shape} weights for gradients of shape {grads.shape}")
    total = np.zeros(grads.shape[1])
    for w, row in zip(weights, grads):
        total += w * row
    return total


def example_rewards(
    d_theta: np.ndarray,
    grads_prev: np.ndarray,
    kernel: np.ndarray,
    metric: str = "dot",
) -> np.ndarray:
    """r_i = d_theta . (kernel * grads_prev[i]), or the cosine of the two."""

    d_theta = np.asarray(d_theta, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    grads_prev = np.asarray(grads_prev, dtype=np.float64)
    if grads_prev.ndim != 2:
        raise ShapeError(f"per-example gradients must be 2-D, got {grads_prev.shape}")
    if d_theta.shape != (grads_prev.shape[1],) or kernel.shape != d_theta.shape:
        raise ShapeError(
            f"dev gradient {d_theta.shape}, kernel {kernel.shape} and example "
            f"gradients {grads_prev.shape} do not line up"
        )
    if metric not in REWARD_METRICS:
        raise ConfigError(f"must be one of {REWARD_METRICS}", path="dds.reward")
    v = kernel * d_theta
    align = dot if metric == "dot" else cosine
    return np.array([align(v, row) for row in grads_prev])


def taylor_reward(
    loss_fn: Callable[[np.ndarray], float],
    theta: np.ndarray,
    v: np.ndarray,
    eps: float,
) -> float:
    """(loss(theta + eps * v) - loss(theta)) / eps, an estimate of v . grad loss.

    ``theta`` is left untouched; the shadow parameters are a fresh array.
    """

    if not eps > 0:
        raise ConfigError("must be > 0", path="dds.taylor.eps")
    theta = np.asarray(theta, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != theta.shape:
        raise ShapeError(f"direction {v.shape} does not match parameters {theta.shape}")
    shadow = theta + eps * v
    base = loss_fn(theta)
    moved = loss_fn(shadow)
    if not (np.isfinite(base) and np.isfinite(moved)):
        raise NumericalError("non-finite loss at the perturbed parameters")
    return (moved - base) / eps


def taylor_rewards(
    model: MlpClassifier,
    theta: np.ndarray,
    v: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    eps: float,
) -> np.ndarray:
    """Batched ``taylor_reward`` with one forward pass per point."""

    if not eps > 0:
        raise ConfigError("must be > 0", path="dds.taylor.eps")
    theta = np.asarray(theta, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != theta.shape:
        raise ShapeError(f"direction {v.shape} does not match parameters {theta.shape}")
    base = model.losses(theta, X, y)
    moved = model.losses(theta + eps * v, X, y)
    return check_finite((moved - base) / eps, "Taylor rewards")


def scorer_gradient(
    scorer: ExampleScorer,
    psi: np.ndarray,
    X: np.ndarray,
    rewards: np.ndarray,
    weighting: str = "uniform",
    y: np.ndarray | None = None,
) -> np.ndarray:
    """Ascent direction d_psi for the scorer.

    ``y`` is only read by a label-head scorer.
    """

    X = check_inputs(X, scorer.d)
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.shape != (X.shape[0],):
        raise ShapeError(f"{rewards.size} rewards for a batch of {X.shape[0]}")
    L = scorer.logprob_grads(psi, X, y)
    match weighting:
        case "uniform":
            coef = rewards / X.shape[0]
        case "scorer":
            coef = rewards * scorer.batch_probs(psi, X, y)
        case _:
            raise ConfigError(f"must be one of {WEIGHTINGS}", path="dds.weighting")
    return coef @ L


def dds_train_step(
    model: MlpClassifier,
    scorer: ExampleScorer,
    state: DdsState,
    opt_theta: OptimizerConfig,
    opt_psi: OptimizerConfig,
    batch: tuple[np.ndarray, np.ndarray],
    dev_batch: tuple[np.ndarray, np.ndarray],
    cfg: DdsConfig,
    update_scorer: bool = True,
) -> DdsStepReport:
    """Advance ``state`` by one step and report what happened."""

    X, y = batch
    Xd, yd = dev_batch
    theta_prev = state.theta

    weights = scorer.batch_probs(state.psi, X, y)
    grads = model.per_example_grads(theta_prev, X, y)
    losses = model.losses(theta_prev, X, y)
    g_theta = weighted_gradient(grads, weights)

    kernel = optim.reward_kernel(state.opt_theta, opt_theta)
    state.theta = optim.step(state.opt_theta, opt_theta, theta_prev, g_theta)

    d_theta = dev_gradient(model, state.theta, Xd, yd)
    dev_loss = model.mean_loss(state.theta, Xd, yd)

    if cfg.taylor.enabled:
        rewards = taylor_rewards(
            model, theta_prev, kernel * d_theta, X, y, cfg.taylor.eps
        )
    else:
        rewards = example_rewards(d_theta, grads, kernel, cfg.reward)

    d_psi = scorer_gradient(scorer, state.psi, X, rewards, cfg.weighting, y)
    if update_scorer:
        state.psi = optim.step(state.opt_psi, opt_psi, state.psi, -d_psi)
    state.t += 1

    return DdsStepReport(
        step=state.t,
        train_loss=float(weights @ losses),
        dev_loss=dev_loss,
        rewards=rewards,
        weights=weights,
        grad_norm_theta=norm(g_theta),
        grad_norm_dev=norm(d_theta),
        grad_norm_psi=norm(d_psi),
        d_psi=d_psi,
    )


def init_models(cfg: RunConfig, train: Dataset) -> tuple[MlpClassifier, ExampleScorer]:
    model = MlpClassifier(train.d, cfg.model.hidden, train.c)
    classes = train.c if cfg.scorer.label_heads else 0
    scorer = ExampleScorer(train.d, cfg.scorer.hidden, classes)
    return model, scorer


def init_theta(model: MlpClassifier, seed: int) -> np.ndarray:
    return model.init_params(Rng(seed).stream("init_model"))


def weight_report(scorer: ExampleScorer, psi: np.ndarray, train: Dataset) -> WeightReport:
    weights = softmax(scorer.scores(psi, train.features, train.labels))
    corrupted = train.corrupted
    mean_bad = float(weights[corrupted].mean()) if corrupted.any() else None
    mean_good = float(weights[~corrupted].mean()) if (~corrupted).any() else None
    ratio = None
    if mean_bad is not None and mean_good:
        ratio = mean_bad / mean_good

    raw = train.class_counts() / len(train)
    weighted = np.bincount(train.labels, weights=weights, minlength=train.c)
    uniform = np.full(train.c, 1.0 / train.c)
    return WeightReport(
        mean_weight_corrupted=mean_bad,
        mean_weight_clean=mean_good,
        corrupted_clean_ratio=ratio,
        raw_class_distribution=raw.tolist(),
        weighted_class_distribution=weighted.tolist(),
        raw_kl_to_uniform=kl_divergence(raw, uniform),
        weighted_kl_to_uniform=kl_divergence(weighted, uniform),
    )


def _metrics_row(
    report: DdsStepReport,
    model: MlpClassifier,
    theta: np.ndarray,
    dev: Dataset,
    phase: int | None,
) -> dict[str, Any]:
    row: dict[str, Any] = {"step": report.step}
    if phase is not None:
        row["phase"] = phase
    row |= {
        "train_loss": report.train_loss,
        "dev_loss": model.mean_loss(theta, dev.features, dev.labels),
        "dev_acc": model.accuracy(theta, dev.features, dev.labels),
        "mean_reward": report.mean_reward,
        "weights_entropy": report.weights_entropy,
        "grad_norm_theta": report.grad_norm_theta,
        "grad_norm_psi": report.grad_norm_psi,
    }
    return row


def _run_phase(
    model: MlpClassifier,
    scorer: ExampleScorer,
    state: DdsState,
    cfg: RunConfig,
    train: Dataset,
    dev: Dataset,
    train_batches: BatchSampler,
    dev_batches: BatchSampler,
    metrics: MetricsWriter | None,
    phase: int | None,
    freeze_steps: int = 0,
) -> None:
    for k in range(cfg.dds.steps):
        rows = train_batches.next()
        dev_rows = dev_batches.next()
        report = dds_train_step(
            model,
            scorer,
            state,
            cfg.optimizer,
            cfg.scorer.optimizer,
            (train.features[rows], train.labels[rows]),
            (dev.features[dev_rows], dev.labels[dev_rows]),
            cfg.dds,
            update_scorer=not cfg.scorer.frozen and k >= freeze_steps,
        )
        row = _metrics_row(report, model, state.theta, dev, phase)
        if metrics is not None:
            metrics.write(row)
        if report.step % cfg.log_every == 0:
            logger.info(
                f"step {report.step}: dev_loss={row['dev_loss']:.4f} "
                f"dev_acc={row['dev_acc']:.4f} mean_reward={report.mean_reward:.3e}"
            )
        else:
            logger.debug(f"step {report.step}: train_loss={report.train_loss:.4f}")


def dds_train(
    cfg: RunConfig,
    train: Dataset,
    dev: Dataset,
    metrics: MetricsWriter | None = None,
) -> DdsRunResult:
    """Run ``dds.steps`` steps, twice in ``retrained`` mode.

    The second phase of a retrained run starts again from the same theta0
    and a fresh model optimizer, keeps the scorer of the first phase frozen
    for ``dds.retrain_freeze_steps`` steps and finetunes it afterwards.
    """

    model, scorer = init_models(cfg, train)
    seed = cfg.seed
    psi0 = scorer.init_params(
        Rng(seed).stream("init_scorer"), zero_head=cfg.scorer.zero_head
    )
    state = DdsState(
        theta=init_theta(model, seed),
        psi=psi0,
        opt_theta=OptimizerState.zeros(model.n_params),
        opt_psi=OptimizerState.zeros(scorer.n_params),
    )
    train_batches = BatchSampler(
        len(train), cfg.dds.batch_size, Rng(seed).stream("train_batches")
    )
    dev_batches = BatchSampler(len(dev), cfg.dds.dev_batch, Rng(seed).stream("dev_batches"))

    logger.info(
        f"dds: {model!r}, {scorer!r}, {cfg.dds.steps} steps, mode={cfg.dds.mode}, "
        f"reward={cfg.dds.reward}{' (taylor)' if cfg.dds.taylor.enabled else ''}"
    )
    retrained = cfg.dds.mode == "retrained"
    phase_dev_acc: dict[int, float] = {}

    _run_phase(
        model,
        scorer,
        state,
        cfg,
        train,
        dev,
        train_batches,
        dev_batches,
        metrics,
        phase=1 if retrained else None,
    )

    if retrained:
        phase_dev_acc[1] = model.accuracy(state.theta, dev.features, dev.labels)
        logger.info(f"phase 1 done: dev_acc={phase_dev_acc[1]:.4f}, retraining theta")
        state.theta = init_theta(model, seed)
        state.opt_theta = OptimizerState.zeros(model.n_params)
        _run_phase(
            model,
            scorer,
            state,
            cfg,
            train,
            dev,
            train_batches,
            dev_batches,
            metrics,
            phase=2,
            freeze_steps=cfg.dds.retrain_freeze_steps,
        )
        phase_dev_acc[2] = model.accuracy(state.theta, dev.features, dev.labels)

    return DdsRunResult(
        theta=state.theta,
        psi=state.psi,
        steps=state.t,
        dev_loss=model.mean_loss(state.theta, dev.features, dev.labels),
        dev_acc=model.accuracy(state.theta, dev.features, dev.labels),
        weight_report=weight_report(scorer, state.psi, train),
        phase_dev_acc=phase_dev_acc,
    )


# EOF
