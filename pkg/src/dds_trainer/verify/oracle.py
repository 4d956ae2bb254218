# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Brute-force bi-level solver for problems of at most three examples.

For every example weighting ``w`` on a regular simplex grid, the inner
problem

    theta*(w) = argmin  sum_i w_i loss_i(theta) + l2/2 * |theta|^2

is solved by full-batch gradient descent with backtracking until the
gradient norm drops below ``tol``; the grid point with the lowest dev loss
at theta*(w) is the reference answer for the learned data weights. The
inner model is binary multinomial logistic regression, strictly convex
thanks to the L2 term.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Iterator
from dataclasses import dataclass
from typing import Any

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.config.run import DdsConfig, OracleConfig
from dds_trainer.engine.dds import DdsState, dds_train_step
from dds_trainer.engine.optim import OptimizerConfig, OptimizerState
from dds_trainer.lib.exceptions import ConvergenceError, ShapeError
from dds_trainer.lib.numeric import Rng
from dds_trainer.models.classifier import MlpClassifier
from dds_trainer.models.scorer import ExampleScorer

logger = get_logger(__name__)

MAX_TRAIN_EXAMPLES = 3
MIN_GRID_RESOLUTION = 11
DDS_TRACE_EVERY = 50


@dataclass(frozen=True)
class TinyProblem:
    X: np.ndarray
    y: np.ndarray
    X_dev: np.ndarray
    y_dev: np.ndarray

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        X_dev = np.atleast_2d(np.asarray(self.X_dev, dtype=np.float64))
        if not 1 <= X.shape[0] <= MAX_TRAIN_EXAMPLES:
            raise ShapeError(f"need 1..{MAX_TRAIN_EXAMPLES} training examples, got {X.shape[0]}")
        if X_dev.shape[1] != X.shape[1]:
            raise ShapeError("dev features do not match training features")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "X_dev", X_dev)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64).reshape(-1))
        object.__setattr__(self, "y_dev", np.asarray(self.y_dev, dtype=np.int64).reshape(-1))

    @classmethod
    def from_config(cls, cfg: OracleConfig) -> TinyProblem:
        train = np.asarray(cfg.train, dtype=np.float64)
        dev = np.asarray(cfg.dev, dtype=np.float64)
        return cls(
            X=train[:, :-1],
            y=train[:, -1].astype(np.int64),
            X_dev=dev[:, :-1],
            y_dev=dev[:, -1].astype(np.int64),
        )

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def model(self) -> MlpClassifier:
        return MlpClassifier(self.d, 0, 2)


@dataclass
class OracleResult:
    best_weights: list[float]
    best_dev_loss: float
    grid: list[tuple[list[float], float]]
    """(weights, dev loss) for every grid point, in visiting order."""
    dds: dict[str, Any] | None = None

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.best_weights))

    def dev_loss_range(self) -> float:
        losses = [loss for _, loss in self.grid]
        return max(losses) - min(losses)

    def as_dict(self) -> dict[str, Any]:
        return {
            "best_weights": self.best_weights,
            "best_dev_loss": self.best_dev_loss,
            "argmax": self.argmax,
            "dev_loss_range": self.dev_loss_range(),
            "landscape": [{"weights": w, "dev_loss": loss} for w, loss in self.grid],
            "dds": self.dds,
        }


def simplex_grid(m: int, resolution: int) -> Iterator[np.ndarray]:
    """Points k / (resolution - 1) with integer k summing to resolution - 1.

    Visited in lexicographic order of (k_1, ..., k_{m-1}).
    """

    total = resolution - 1

    def _walk(prefix: list[int], left: int) -> Iterator[list[int]]:
        if len(prefix) == m - 1:
            yield prefix + [left]
            return
        for k in range(left + 1):
            yield from _walk(prefix + [k], left - k)

    for ks in _walk([], total):
        yield np.asarray(ks, dtype=np.float64) / total


def solve_inner(
    model: MlpClassifier,
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    l2: float,
    tol: float,
    theta0: np.ndarray,
    max_iter: int = 100000,
) -> np.ndarray:
    """Gradient descent with Armijo backtracking on the weighted L2 objective."""

    def objective(theta: np.ndarray) -> float:
        return float(weights @ model.losses(theta, X, y)) + 0.5 * l2 * float(theta @ theta)

    def gradient(theta: np.ndarray) -> np.ndarray:
        return weights @ model.per_example_grads(theta, X, y) + l2 * theta

    theta = theta0.copy()
    value = objective(theta)
    # the step only ever shrinks; near the optimum the sufficient-decrease
    # test is below rounding, so it is relaxed by a few ulps of the objective
    step = 1.0
    for _ in range(max_iter):
        g = gradient(theta)
        gg = float(g @ g)
        if np.sqrt(gg) <= tol:
            return theta
        slack = 1e-13 * max(1.0, abs(value))
        while True:
            candidate = theta - step * g
            cand_value = objective(candidate)
            if cand_value <= value - 0.5 * step * gg + slack:
                break
            step *= 0.5
            if step < 1e-12:
                raise ConvergenceError("backtracking line search stalled")
        theta, value = candidate, cand_value
    raise ConvergenceError(
        f"inner solver did not reach gradient norm {tol} in {max_iter} iterations"
    )


def brute_force_bilevel(
    problem: TinyProblem,
    grid_resolution: int = 101,
    l2: float = 0.1,
    tol: float = 1e-10,
    max_iter: int = 100000,
) -> OracleResult:
    if grid_resolution < MIN_GRID_RESOLUTION:
        raise ShapeError(f"grid resolution must be >= {MIN_GRID_RESOLUTION}")
    model = problem.model()
    theta = np.zeros(model.n_params)
    grid = []
    best: tuple[np.ndarray, float] | None = None
    for weights in simplex_grid(problem.m, grid_resolution):
        # warm start from the previous grid point
        theta = solve_inner(model, problem.X, problem.y, weights, l2, tol, theta, max_iter)
        dev_loss = model.mean_loss(theta, problem.X_dev, problem.y_dev)
        grid.append((weights.tolist(), dev_loss))
        if best is None or dev_loss < best[1]:
            best = (weights, dev_loss)
    logger.info(
        f"brute force over {len(grid)} grid points: w*={best[0].tolist()} "
        f"dev loss {best[1]:.6f}"
    )
    return OracleResult(best_weights=best[0].tolist(), best_dev_loss=best[1], grid=grid)


def dds_on_tiny_problem(problem: TinyProblem, cfg: OracleConfig, seed: int) -> dict[str, Any]:
    """Train a linear scorer with full-batch DDS and report its weights."""

    model = problem.model()
    scorer = ExampleScorer(problem.d, 0)
    rng = Rng(seed)
    state = DdsState(
        theta=model.init_params(rng.stream("init_model")),
        psi=scorer.init_params(rng.stream("init_scorer")),
        opt_theta=OptimizerState.zeros(model.n_params),
        opt_psi=OptimizerState.zeros(scorer.n_params),
    )
    opt_theta = OptimizerConfig(kind="sgd", lr=cfg.lr)
    opt_psi = OptimizerConfig(kind="adam", lr=cfg.scorer_lr)
    dds_cfg = DdsConfig(batch_size=problem.m, weighting="scorer")

    trace = [scorer.batch_probs(state.psi, problem.X).tolist()]
    for t in range(1, cfg.dds_steps + 1):
        dds_train_step(
            model,
            scorer,
            state,
            opt_theta,
            opt_psi,
            (problem.X, problem.y),
            (problem.X_dev, problem.y_dev),
            dds_cfg,
        )
        if t % DDS_TRACE_EVERY == 0:
            trace.append(scorer.batch_probs(state.psi, problem.X).tolist())

    weights = scorer.batch_probs(state.psi, problem.X)
    return {
        "seed": seed,
        "steps": cfg.dds_steps,
        "weights": weights.tolist(),
        "argmax": int(np.argmax(weights)),
        "trace": trace,
    }


def run_oracle(cfg: OracleConfig, seed: int) -> OracleResult:
    problem = TinyProblem.from_config(cfg)
    result = brute_force_bilevel(problem, cfg.grid_resolution, cfg.l2, cfg.tol, cfg.max_iter)
    if cfg.dds_steps > 0:
        runs = [dds_on_tiny_problem(problem, cfg, seed + k) for k in range(cfg.dds_seeds)]
        result.dds = {
            "runs": runs,
            "agree": all(run["argmax"] == result.argmax for run in runs),
        }
        logger.info(f"dds on tiny problem agrees with w*: {result.dds['agree']}")
    return result


# EOF
