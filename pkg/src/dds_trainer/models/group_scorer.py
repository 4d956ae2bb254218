# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Source-group scorer g(i | availability; omega).

A two-layer perceptron reads the 0/1 availability indicator of a target
instance and produces one logit per source group; unavailable groups are
masked to probability exactly 0.

Flat layout of omega: ``W1 [hidden, n], b1 [hidden], W2 [n, hidden], b2 [n]``.
The output head (W2, b2) starts at zero, or with ``b2`` set to the prior
logits, so the initial distribution is uniform or exactly softmax(prior).
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

from collections.abc import Sequence

import numpy as np

from dds_trainer.lib.exceptions import ShapeError
from dds_trainer.lib.numeric import Rng, glorot_uniform, masked_softmax
from dds_trainer.models.meta import ParamLayout, check_params


class GroupScorer:
    def __init__(self, n: int, hidden: int) -> None:
        if n < 1 or hidden < 1:
            raise ShapeError(f"invalid group scorer shape n={n}, hidden={hidden}")
        self.n = n
        self.hidden = hidden
        self.layout = ParamLayout(
            (
                ("W1", (hidden, n)),
                ("b1", (hidden,)),
                ("W2", (n, hidden)),
                ("b2", (n,)),
            )
        )

    @property
    def n_params(self) -> int:
        return self.layout.size

    def __repr__(self) -> str:
        return f"GroupScorer(n={self.n}, hidden={self.hidden})"

    def init_params(
        self, rng: Rng, prior_logits: Sequence[float] | None = None
    ) -> np.ndarray:
        omega = np.zeros(self.n_params)
        p = self.layout.unpack(omega)
        p["W1"][:] = glorot_uniform(rng, self.n, self.hidden, p["W1"].shape)
        if prior_logits is not None:
            prior = np.asarray(prior_logits, dtype=np.float64)
            if prior.shape != (self.n,):
                raise ShapeError(
                    f"prior_logits has {prior.size} entries, expected {self.n}"
                )
            p["b2"][:] = prior
        return omega

    def _availability(self, availability: np.ndarray) -> np.ndarray:
        A = np.asarray(availability, dtype=np.float64)
        if A.ndim == 1:
            A = A[None, :]
        if A.ndim != 2 or A.shape[1] != self.n:
            raise ShapeError(f"availability has shape {A.shape}, expected (m, {self.n})")
        if not np.all((A == 0.0) | (A == 1.0)):
            raise ShapeError("availability entries must be 0 or 1")
        if not np.all(A.any(axis=1)):
            raise ShapeError("availability vector has no available group")
        return A

    def _forward(self, omega: np.ndarray, A: np.ndarray):
        p = self.layout.unpack(omega)
        H = np.tanh(A @ p["W1"].T + p["b1"])
        return H, H @ p["W2"].T + p["b2"]

    def probs_batch(self, omega: np.ndarray, availability: np.ndarray) -> np.ndarray:
        """Masked softmax per row, shape (m, n)."""

        omega = check_params(omega, self.layout, "omega")
        A = self._availability(availability)
        _, O = self._forward(omega, A)
        return masked_softmax(O, A > 0)

    def probs(self, omega: np.ndarray, availability: np.ndarray) -> np.ndarray:
        return self.probs_batch(omega, np.asarray(availability)[None, :])[0]

    def backprop(
        self, omega: np.ndarray, availability: np.ndarray, dlogits: np.ndarray
    ) -> np.ndarray:
        """Sum over rows of d(dlogits . logits)/d omega."""

        omega = check_params(omega, self.layout, "omega")
        A = self._availability(availability)
        dO = np.asarray(dlogits, dtype=np.float64).reshape(A.shape)
        p = self.layout.unpack(omega)
        H, _ = self._forward(omega, A)
        dA = (dO @ p["W2"]) * (1.0 - H * H)
        parts = {
            "W1": dA.T @ A,
            "b1": dA.sum(axis=0),
            "W2": dO.T @ H,
            "b2": dO.sum(axis=0),
        }
        return np.concatenate([parts[name].reshape(-1) for name, _ in self.layout.blocks])

    def logprob_grad(
        self, omega: np.ndarray, availability: np.ndarray, i: int
    ) -> np.ndarray:
        """grad_omega log g(i | availability; omega)."""

        a = np.asarray(availability, dtype=np.float64)
        if not 0 <= i < self.n:
            raise ShapeError(f"group index {i} out of range for {self.n} groups")
        if a.shape != (self.n,) or a[i] != 1.0:
            raise ShapeError(f"group {i} is not available")
        probs = self.probs(omega, a)
        dO = -probs
        dO[i] += 1.0
        return self.backprop(omega, a[None, :], dO[None, :])

    def reward_weighted_grad(
        self, omega: np.ndarray, availability: np.ndarray, rewards: np.ndarray
    ) -> np.ndarray:
        """(1/m) sum_j sum_{i available for j} rewards[i] grad log g(i | a_j).

        In logit space row j contributes ``r * a_j - (r . a_j) * p_j``, so the
        whole estimator is a single backward pass.
        """

        A = self._availability(availability)
        r = np.asarray(rewards, dtype=np.float64)
        if r.shape != (self.n,):
            raise ShapeError(f"rewards have {r.size} entries, expected {self.n}")
        P = self.probs_batch(omega, A)
        dO = r[None, :] * A - (A @ r)[:, None] * P
        return self.backprop(omega, A, dO) / A.shape[0]


# EOF
