# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Per-example data scorer.

Same body as the classifier with a regression head. By default the head is
a single scalar and the score looks at the features only. With
``classes > 0`` the head has one output per class and the score of an
example is read from the output of its own label, so the network input is
still the feature vector but the score depends on ``(x, y)``.

Flat layout of psi: ``W1 [hidden, d], b1 [hidden], w2 [k, hidden], b2 [k]``,
or ``w [k, d], b [k]`` when ``hidden == 0``, with ``k = max(classes, 1)``.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import numpy as np

from dds_trainer.lib.exceptions import ShapeError
from dds_trainer.lib.numeric import Rng, glorot_uniform, softmax
from dds_trainer.models.meta import ParamLayout, check_inputs, check_params


class ExampleScorer:
    def __init__(self, d: int, hidden: int, classes: int = 0) -> None:
        if d < 1 or hidden < 0 or classes < 0:
            raise ShapeError(
                f"invalid scorer shape d={d}, hidden={hidden}, classes={classes}"
            )
        self.d = d
        self.hidden = hidden
        self.classes = classes
        k = max(classes, 1)
        if hidden:
            self.layout = ParamLayout(
                (
                    ("W1", (hidden, d)),
                    ("b1", (hidden,)),
                    ("w2", (k, hidden)),
                    ("b2", (k,)),
                )
            )
            self.head = ("w2", "b2")
        else:
            self.layout = ParamLayout((("w", (k, d)), ("b", (k,))))
            self.head = ("w", "b")

    @property
    def n_params(self) -> int:
        return self.layout.size

    @property
    def label_heads(self) -> bool:
        return self.classes > 0

    def __repr__(self) -> str:
        return f"ExampleScorer(d={self.d}, hidden={self.hidden}, classes={self.classes})"

    def init_params(self, rng: Rng, zero_head: bool = False) -> np.ndarray:
        """Glorot-uniform body; with ``zero_head`` every score starts at 0."""

        psi = np.zeros(self.n_params)
        p = self.layout.unpack(psi)
        w = "w2" if self.hidden else "w"
        fan_in = self.hidden or self.d
        if self.hidden:
            p["W1"][:] = glorot_uniform(rng, self.d, self.hidden, p["W1"].shape)
        head = glorot_uniform(rng, fan_in, p[w].shape[0], p[w].shape)
        if not zero_head:
            p[w][:] = head
        return psi

    def _rows(self, X: np.ndarray, y: np.ndarray | None) -> np.ndarray:
        """Head index per row: the label, or 0 for a scalar head."""

        rows = X.shape[0]
        if not self.label_heads:
            return np.zeros(rows, dtype=np.int64)
        if y is None:
            raise ShapeError("a label-head scorer needs the labels of the batch")
        y = np.asarray(y).reshape(-1)
        if y.shape != (rows,):
            raise ShapeError(f"{y.size} labels for {rows} inputs")
        if not np.issubdtype(y.dtype, np.integer) or np.any((y < 0) | (y >= self.classes)):
            raise ShapeError(f"labels must be integers in [0, {self.classes})")
        return y.astype(np.int64)

    def _hidden(self, psi: np.ndarray, X: np.ndarray) -> np.ndarray:
        p = self.layout.unpack(psi)
        return np.tanh(X @ p["W1"].T + p["b1"])

    def scores(
        self, psi: np.ndarray, X: np.ndarray, y: np.ndarray | None = None
    ) -> np.ndarray:
        """Raw scalar score per row of X, shape (B,)."""

        psi = check_params(psi, self.layout, "psi")
        X = check_inputs(X, self.d)
        heads = self._rows(X, y)
        p = self.layout.unpack(psi)
        if self.hidden:
            Z = self._hidden(psi, X)
            return np.einsum("bh,bh->b", Z, p["w2"][heads]) + p["b2"][heads]
        return np.einsum("bd,bd->b", X, p["w"][heads]) + p["b"][heads]

    def score_grads(
        self, psi: np.ndarray, X: np.ndarray, y: np.ndarray | None = None
    ) -> np.ndarray:
        """Gradient of each raw score w.r.t. psi, shape (B, n_params)."""

        psi = check_params(psi, self.layout, "psi")
        X = check_inputs(X, self.d)
        heads = self._rows(X, y)
        rows = X.shape[0]
        k = max(self.classes, 1)
        onehot = np.zeros((rows, k))
        onehot[np.arange(rows), heads] = 1.0
        if not self.hidden:
            return self.layout.pack_rows(
                {"w": onehot[:, :, None] * X[:, None, :], "b": onehot}, rows
            )
        p = self.layout.unpack(psi)
        Z = self._hidden(psi, X)
        dA = p["w2"][heads] * (1.0 - Z * Z)
        parts = {
            "W1": dA[:, :, None] * X[:, None, :],
            "b1": dA,
            "w2": onehot[:, :, None] * Z[:, None, :],
            "b2": onehot,
        }
        return self.layout.pack_rows(parts, rows)

    def batch_probs(
        self, psi: np.ndarray, X: np.ndarray, y: np.ndarray | None = None
    ) -> np.ndarray:
        """Within-batch softmax of the scores."""

        X = check_inputs(X, self.d)
        if X.shape[0] == 0:
            raise ShapeError("scorer batch is empty")
        return softmax(self.scores(psi, X, y))

    def logprob_grads(
        self, psi: np.ndarray, X: np.ndarray, y: np.ndarray | None = None
    ) -> np.ndarray:
        """Row i is grad_psi log batch_probs[i], shape (B, n_params)."""

        X = check_inputs(X, self.d)
        if X.shape[0] == 0:
            raise ShapeError("scorer batch is empty")
        S = self.score_grads(psi, X, y)
        probs = softmax(self.scores(psi, X, y))
        return S - probs @ S

    def logprob_grad(
        self, psi: np.ndarray, X: np.ndarray, i: int, y: np.ndarray | None = None
    ) -> np.ndarray:
        X = check_inputs(X, self.d)
        if not 0 <= i < X.shape[0]:
            raise ShapeError(f"index {i} out of range for batch of {X.shape[0]}")
        return self.logprob_grads(psi, X, y)[i]

    def head_mask(self) -> np.ndarray:
        """Boolean mask over psi selecting the output head."""

        mask = np.zeros(self.n_params, dtype=bool)
        for name in self.head:
            mask[self.layout.offsets[name]] = True
        return mask


# EOF
