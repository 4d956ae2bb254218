# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Main classifier: one tanh hidden layer and a softmax output.

Flat layout of theta, each block row-major:

    W1 [hidden, d], b1 [hidden], W2 [classes, hidden], b2 [classes]

With ``hidden == 0`` the model is multinomial logistic regression with
layout ``W [classes, d], b [classes]``.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import numpy as np

from dds_trainer.lib.exceptions import ShapeError
from dds_trainer.lib.numeric import Rng, glorot_uniform
from dds_trainer.models.meta import ParamLayout, check_inputs, check_params


class MlpClassifier:
    def __init__(self, d: int, hidden: int, classes: int) -> None:
        if d < 1 or hidden < 0 or classes < 2:
            raise ShapeError(
                f"invalid classifier shape d={d}, hidden={hidden}, classes={classes}"
            )
        self.d = d
        self.hidden = hidden
        self.classes = classes
        if hidden:
            self.layout = ParamLayout(
                (
                    ("W1", (hidden, d)),
                    ("b1", (hidden,)),
                    ("W2", (classes, hidden)),
                    ("b2", (classes,)),
                )
            )
        else:
            self.layout = ParamLayout((("W", (classes, d)), ("b", (classes,))))

    @property
    def n_params(self) -> int:
        return self.layout.size

    def __repr__(self) -> str:
        return f"MlpClassifier(d={self.d}, hidden={self.hidden}, classes={self.classes})"

    def init_params(self, rng: Rng) -> np.ndarray:
        theta = np.zeros(self.n_params)
        p = self.layout.unpack(theta)
        if self.hidden:
            p["W1"][:] = glorot_uniform(rng, self.d, self.hidden, p["W1"].shape)
            p["W2"][:] = glorot_uniform(rng, self.hidden, self.classes, p["W2"].shape)
        else:
            p["W"][:] = glorot_uniform(rng, self.d, self.classes, p["W"].shape)
        return theta

    def _check_labels(self, y: np.ndarray, rows: int) -> np.ndarray:
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        if y.shape != (rows,):
            raise ShapeError(f"{y.size} labels for {rows} inputs")
        if np.any(y < 0) or np.any(y >= self.classes):
            raise ShapeError(f"labels must lie in [0, {self.classes})")
        return y

    def _forward(
        self, theta: np.ndarray, X: np.ndarray
    ) -> tuple[np.ndarray | None, np.ndarray]:
        p = self.layout.unpack(theta)
        if self.hidden:
            Z = np.tanh(X @ p["W1"].T + p["b1"])
            return Z, Z @ p["W2"].T + p["b2"]
        return None, X @ p["W"].T + p["b"]

    @staticmethod
    def _log_softmax(O: np.ndarray) -> np.ndarray:
        m = O.max(axis=1, keepdims=True)
        return O - (m + np.log(np.exp(O - m).sum(axis=1, keepdims=True)))

    def predict_proba(self, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
        theta = check_params(theta, self.layout, "theta")
        X = check_inputs(X, self.d)
        _, O = self._forward(theta, X)
        return np.exp(self._log_softmax(O))

    def predict(self, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
        return self.predict_proba(theta, X).argmax(axis=1)

    def accuracy(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=np.int64)
        if y.size == 0:
            return 0.0
        return float(np.mean(self.predict(theta, X) == y))

    def losses(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Per-example cross-entropy, shape (B,)."""

        theta = check_params(theta, self.layout, "theta")
        X = check_inputs(X, self.d)
        y = self._check_labels(y, X.shape[0])
        _, O = self._forward(theta, X)
        return -self._log_softmax(O)[np.arange(X.shape[0]), y]

    def loss(self, theta: np.ndarray, x: np.ndarray, y: int) -> float:
        """Cross-entropy -log p(y|x) of a single example."""

        return float(self.losses(theta, x, [y])[0])

    def mean_loss(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.losses(theta, X, y)))

    def per_example_grads(
        self, theta: np.ndarray, X: np.ndarray, y: np.ndarray
    ) -> np.ndarray:
        """Gradient of each example's loss, shape (B, n_params)."""

        theta = check_params(theta, self.layout, "theta")
        X = check_inputs(X, self.d)
        y = self._check_labels(y, X.shape[0])
        rows = X.shape[0]
        Z, O = self._forward(theta, X)
        D = np.exp(self._log_softmax(O))
        D[np.arange(rows), y] -= 1.0

        if not self.hidden:
            parts = {"W": D[:, :, None] * X[:, None, :], "b": D}
            return self.layout.pack_rows(parts, rows)

        p = self.layout.unpack(theta)
        dA = (D @ p["W2"]) * (1.0 - Z * Z)
        parts = {
            "W1": dA[:, :, None] * X[:, None, :],
            "b1": dA,
            "W2": D[:, :, None] * Z[:, None, :],
            "b2": D,
        }
        return self.layout.pack_rows(parts, rows)

    def loss_grad(self, theta: np.ndarray, x: np.ndarray, y: int) -> np.ndarray:
        return self.per_example_grads(theta, x, [y])[0]

    def mean_grad(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Arithmetic mean of per-example gradients, rows summed in order."""

        G = self.per_example_grads(theta, X, y)
        total = np.zeros(G.shape[1])
        for row in G:
            total += row
        return total / G.shape[0]


# EOF
