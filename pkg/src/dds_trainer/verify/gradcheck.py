# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Finite-difference checks of the scorer hypergradient.

The objective is the dev loss after one weighted model step taken from a
fixed theta0:

    J(psi) = mean dev loss at step(theta0, sum_i softmax(scores(psi))_i g_i)

theta0 and the optimizer state do not depend on psi, so the one-step
derivative is exact and the analytic d_psi of a DDS step must equal -dJ/dpsi.
The multi-step variant unrolls several steps with psi fixed and compares the
full derivative against the last-step analytic d_psi; the gap it reports is
the bias of treating the previous parameters as independent of psi.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.config.run import DdsConfig, GradcheckConfig
from dds_trainer.engine import optim
from dds_trainer.engine.dds import DdsState, dds_train_step, weighted_gradient
from dds_trainer.engine.optim import OptimizerConfig, OptimizerState
from dds_trainer.lib.numeric import Rng
from dds_trainer.models.classifier import MlpClassifier
from dds_trainer.models.scorer import ExampleScorer
from dds_trainer.verify.fd import GradCheckReport, central_difference
from dds_trainer.verify.taylor import TaylorScan, taylor_error_scan

logger = get_logger(__name__)

Batch = tuple[np.ndarray, np.ndarray]


@dataclass
class GradcheckResult:
    reports: list[GradCheckReport] = field(default_factory=list)
    taylor: TaylorScan | None = None
    markov_bias: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def max_rel_error(self) -> dict[str, float]:
        worst: dict[str, float] = {}
        for r in self.reports:
            key = r.label.split("/seed=")[0]
            worst[key] = max(worst.get(key, 0.0), r.max_rel_error)
        return worst

    def as_dict(self) -> dict[str, Any]:
        return {
            "pass": self.passed,
            "max_rel_error": self.max_rel_error,
            "checks": [r.as_dict() for r in self.reports],
            "taylor": self.taylor.as_dict() if self.taylor else None,
            "markov_bias": self.markov_bias,
        }


def weighted_step(
    model: MlpClassifier,
    scorer: ExampleScorer,
    theta: np.ndarray,
    psi: np.ndarray,
    state: OptimizerState,
    opt_cfg: OptimizerConfig,
    batch: Batch,
) -> np.ndarray:
    """One scorer-weighted model step; advances ``state``."""

    X, y = batch
    weights = scorer.batch_probs(psi, X, y)
    g = weighted_gradient(model.per_example_grads(theta, X, y), weights)
    return optim.step(state, opt_cfg, theta, g)


def one_step_bilevel_fd(
    model: MlpClassifier,
    scorer: ExampleScorer,
    theta0: np.ndarray,
    psi: np.ndarray,
    batch: Batch,
    dev_batch: Batch,
    opt_cfg: OptimizerConfig,
    h: float,
    state: OptimizerState | None = None,
) -> np.ndarray:
    """dJ/dpsi by central differences, every step taken from the same theta0."""

    state = state or OptimizerState.zeros(model.n_params)
    Xd, yd = dev_batch

    def objective(p: np.ndarray) -> float:
        theta1 = weighted_step(model, scorer, theta0, p, state.copy(), opt_cfg, batch)
        return model.mean_loss(theta1, Xd, yd)

    return central_difference(objective, psi, h)


def analytic_scorer_gradient(
    model: MlpClassifier,
    scorer: ExampleScorer,
    theta0: np.ndarray,
    psi: np.ndarray,
    batch: Batch,
    dev_batch: Batch,
    opt_cfg: OptimizerConfig,
    weighting: str,
    state: OptimizerState | None = None,
) -> np.ndarray:
    """d_psi as computed by one DDS step, without applying it."""

    step_state = DdsState(
        theta=theta0.copy(),
        psi=psi.copy(),
        opt_theta=(state or OptimizerState.zeros(model.n_params)).copy(),
        opt_psi=OptimizerState.zeros(scorer.n_params),
    )
    report = dds_train_step(
        model,
        scorer,
        step_state,
        opt_cfg,
        OptimizerConfig(kind="adam"),
        batch,
        dev_batch,
        DdsConfig(batch_size=len(batch[1]), weighting=weighting),
        update_scorer=False,
    )
    return report.d_psi


def warm_state(
    model: MlpClassifier,
    scorer: ExampleScorer,
    theta0: np.ndarray,
    psi: np.ndarray,
    opt_cfg: OptimizerConfig,
    batch: Batch,
    steps: int,
) -> OptimizerState:
    """Optimizer state after ``steps`` replays of the weighted gradient at theta0.

    Only the state is kept; theta0 itself is not moved.
    """

    state = OptimizerState.zeros(model.n_params)
    if opt_cfg.kind == "sgd" or steps == 0:
        return state
    X, y = batch
    weights = scorer.batch_probs(psi, X, y)
    g = weighted_gradient(model.per_example_grads(theta0, X, y), weights)
    theta = theta0.copy()
    for _ in range(steps):
        theta = optim.step(state, opt_cfg, theta, g)
    return state


def _problem(cfg: GradcheckConfig, seed: int):
    rng = Rng(seed)
    data = rng.stream("data")
    model = MlpClassifier(cfg.d, cfg.hidden, cfg.c)
    scorer = ExampleScorer(cfg.d, cfg.scorer_hidden)
    batch = (data.normal((cfg.batch_size, cfg.d)), data.integers(cfg.c, size=cfg.batch_size))
    dev_batch = (data.normal((cfg.batch_size, cfg.d)), data.integers(cfg.c, size=cfg.batch_size))
    theta0 = model.init_params(rng.stream("init_model"))
    return model, scorer, batch, dev_batch, theta0, rng


def check_seed(
    cfg: GradcheckConfig, seed: int, kind: str, weighting: str
) -> GradCheckReport:
    """Analytic d_psi against -dJ/dpsi for one random problem."""

    model, scorer, batch, dev_batch, theta0, rng = _problem(cfg, seed)
    # uniform coefficients are exact only at uniform weights
    psi = scorer.init_params(rng.stream("init_scorer"), zero_head=weighting == "uniform")
    opt_cfg = OptimizerConfig(kind=kind, lr=cfg.lr, eps=cfg.adam_eps)
    state = warm_state(model, scorer, theta0, psi, opt_cfg, batch, cfg.warmup_steps)

    analytic = analytic_scorer_gradient(
        model, scorer, theta0, psi, batch, dev_batch, opt_cfg, weighting, state
    )
    numeric = -one_step_bilevel_fd(
        model, scorer, theta0, psi, batch, dev_batch, opt_cfg, cfg.h, state
    )
    tolerance = cfg.adam_tolerance if kind == "adam" else cfg.tolerance
    return GradCheckReport.compare(
        analytic, numeric, tolerance, label=f"{kind}/{weighting}/seed={seed}"
    )


def multi_step_markov_bias(
    model: MlpClassifier,
    scorer: ExampleScorer,
    theta0: np.ndarray,
    psi: np.ndarray,
    batches: Sequence[Batch],
    dev_batch: Batch,
    opt_cfg: OptimizerConfig,
    h: float,
) -> GradCheckReport:
    """Unrolled k-step derivative against the last-step analytic d_psi.

    Reported only; the relative error is the Markov-assumption bias, so the
    report's tolerance is infinite.
    """

    Xd, yd = dev_batch

    def objective(p: np.ndarray) -> float:
        state = OptimizerState.zeros(model.n_params)
        theta = theta0
        for batch in batches:
            theta = weighted_step(model, scorer, theta, p, state, opt_cfg, batch)
        return model.mean_loss(theta, Xd, yd)

    state = OptimizerState.zeros(model.n_params)
    theta = theta0
    for batch in batches[:-1]:
        theta = weighted_step(model, scorer, theta, psi, state, opt_cfg, batch)
    analytic = analytic_scorer_gradient(
        model, scorer, theta, psi, batches[-1], dev_batch, opt_cfg, "scorer", state
    )
    numeric = -central_difference(objective, psi, h)
    return GradCheckReport.compare(
        analytic, numeric, float("inf"), label=f"markov/k={len(batches)}"
    )


def run_gradcheck(cfg: GradcheckConfig, seed: int = 0) -> GradcheckResult:
    """Checks problems ``seed .. seed + cfg.seeds - 1``; the scans use ``seed``."""

    result = GradcheckResult()
    for kind in cfg.optimizers:
        for weighting in ("scorer", "uniform"):
            for s in range(seed, seed + cfg.seeds):
                result.reports.append(check_seed(cfg, s, kind, weighting))
        logger.info(
            f"gradcheck {kind}: max rel error "
            f"{max(r.max_rel_error for r in result.reports if r.label.startswith(kind)):.3e}"
        )

    # Taylor scan on the direction a DDS step actually uses: kernel * d_theta
    model, scorer, batch, dev_batch, theta0, rng = _problem(cfg, seed)
    opt_cfg = OptimizerConfig(kind="sgd", lr=cfg.lr)
    theta1 = optim.step(
        OptimizerState.zeros(model.n_params),
        opt_cfg,
        theta0,
        model.mean_grad(theta0, *batch),
    )
    v = cfg.lr * model.mean_grad(theta1, *dev_batch)
    result.taylor = taylor_error_scan(model, theta0, v, batch[0], batch[1], cfg.taylor_eps)
    logger.info(f"taylor scan: slope {result.taylor.slope}")

    psi = scorer.init_params(rng.stream("init_scorer"))
    data = Rng(seed).stream("train_batches")
    batches = [
        (data.normal((cfg.batch_size, cfg.d)), data.integers(cfg.c, size=cfg.batch_size))
        for _ in range(cfg.markov_steps)
    ]
    for k in (1, cfg.markov_steps):
        bias = multi_step_markov_bias(
            model, scorer, theta0, psi, batches[:k], dev_batch, opt_cfg, cfg.h
        )
        result.markov_bias.append({"steps": k, "max_rel_error": bias.max_rel_error})
        logger.info(f"markov bias over {k} steps: max rel error {bias.max_rel_error:.3e}")

    return result


# EOF
