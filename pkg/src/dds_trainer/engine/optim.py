# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Parameter update rules and their reward-scaling kernels.

Every rule has the form ``theta_t = theta_{t-1} - g(grad)``. The kernel is
the per-parameter derivative of ``g`` that the scorer reward multiplies
into the dev gradient:

    sgd       theta - lr * grad                         kernel: lr
    momentum  m = mu*m + lr*grad; theta - m             kernel: lr
    adam      v = b2*v + (1-b2)*grad^2                  kernel:
              vhat = v / (1 - b2^t)                       lr*sqrt((1-b2^t) / (b2*v_{t-1} + eps))
              theta - lr*grad / sqrt(vhat + eps)

``adam`` is the variant without a first-moment average. The Adam kernel
keeps ``eps`` inside the square root so it stays finite at t=1, where
v_{t-1} is still zero.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from dds_trainer.lib.exceptions import ConfigError, NumericalError, ShapeError

OPTIMIZER_KINDS = ("sgd", "momentum", "adam")

# Model learning rate 0.001, scorer learning rate 0.0001, no decay.
DEFAULT_LR = 0.001
DEFAULT_SCORER_LR = 0.0001


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "sgd"
    lr: float = DEFAULT_LR
    """Learning rate, > 0."""
    momentum: float = 0.9
    """Momentum coefficient mu, in [0, 1)."""
    beta2: float = 0.999
    """Second-moment decay, in (0, 1)."""
    eps: float = 1e-8
    """Added under the square root of the Adam denominator, > 0."""

    def __post_init__(self) -> None:
        if self.kind not in OPTIMIZER_KINDS:
            raise ConfigError(f"must be one of {OPTIMIZER_KINDS}", path="kind")
        if not self.lr > 0:
            raise ConfigError("must be > 0", path="lr")
        if not 0 <= self.momentum < 1:
            raise ConfigError("must be in [0, 1)", path="momentum")
        if not 0 < self.beta2 < 1:
            raise ConfigError("must be in (0, 1)", path="beta2")
        if not self.eps > 0:
            raise ConfigError("must be > 0", path="eps")


@dataclass
class OptimizerState:
    t: int = 0
    """Number of completed steps."""
    m: np.ndarray = field(default_factory=lambda: np.zeros(0))
    """Momentum buffer."""
    v: np.ndarray = field(default_factory=lambda: np.zeros(0))
    """Adam second moment, entries >= 0."""

    @classmethod
    def zeros(cls, size: int) -> OptimizerState:
        return cls(t=0, m=np.zeros(size), v=np.zeros(size))

    def copy(self) -> OptimizerState:
        return OptimizerState(t=self.t, m=self.m.copy(), v=self.v.copy())


def _sgd(state: OptimizerState, cfg: OptimizerConfig, theta, grad) -> np.ndarray:
    return theta - cfg.lr * grad


def _momentum(state: OptimizerState, cfg: OptimizerConfig, theta, grad) -> np.ndarray:
    state.m = cfg.momentum * state.m + cfg.lr * grad
    return theta - state.m


def _adam(state: OptimizerState, cfg: OptimizerConfig, theta, grad) -> np.ndarray:
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (grad * grad)
    vhat = state.v / (1.0 - cfg.beta2**state.t)
    return theta - cfg.lr * grad / np.sqrt(vhat + cfg.eps)


_UPDATE_RULES: dict[str, Callable[..., np.ndarray]] = {
    "sgd": _sgd,
    "momentum": _momentum,
    "adam": _adam,
}


def step(
    state: OptimizerState, cfg: OptimizerConfig, theta: np.ndarray, grad: np.ndarray
) -> np.ndarray:
    """Apply one update; returns the new parameters and advances ``state``."""

    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if theta.shape != grad.shape:
        raise ShapeError(f"gradient shape {grad.shape} != parameter shape {theta.shape}")
    if state.m.shape != theta.shape or state.v.shape != theta.shape:
        raise ShapeError(
            f"optimizer buffers have shape {state.m.shape}, parameters {theta.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite gradient passed to optimizer")
    state.t += 1
    return _UPDATE_RULES[cfg.kind](state, cfg, theta, grad)


def reward_kernel(state: OptimizerState, cfg: OptimizerConfig) -> np.ndarray:
    """Per-parameter scale for the upcoming step t = state.t + 1.

    Must be taken before ``step`` is applied, while ``state.v`` still holds
    v_{t-1}.
    """

    if cfg.kind in ("sgd", "momentum"):
        return np.full(state.v.shape, cfg.lr)
    t = state.t + 1
    return cfg.lr * np.sqrt((1.0 - cfg.beta2**t) / (cfg.beta2 * state.v + cfg.eps))


# EOF
