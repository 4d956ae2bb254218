# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Dense-vector arithmetic and seeded randomness.

Vectors are 1-D ``numpy.float64`` arrays. The scalar reductions exposed here
(``dot``, ``norm``, ``cosine``) go through ``math.fsum`` so that their result
is correctly rounded and therefore independent of summation order, BLAS build
and platform.

``Rng`` wraps a ``numpy.random.Generator`` over the PCG64 bit generator.
PCG64 produces the same stream on every platform for a given
``SeedSequence``, and named sub-streams are derived with a fixed
``spawn_key`` so that data, initialization and batching can be reseeded
independently of each other.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import math
from collections.abc import Iterable
from typing import Any

import numpy as np

from dds_trainer.config.app import get_logger
from dds_trainer.lib.exceptions import NumericalError, ShapeError

logger = get_logger(__name__)

Vector = np.ndarray

ZERO_NORM = 1e-12
SIMPLEX_TOL = 1e-9

# stream ids for Rng.stream(); do not renumber, runs are keyed on them
STREAMS = {
    "data": 0,
    "init_model": 1,
    "init_scorer": 2,
    "train_batches": 3,
    "dev_batches": 4,
    "group_sampling": 5,
    "scorer_batches": 6,
    "noise": 7,
    "split": 8,
}


def as_vector(values: Iterable[float] | np.ndarray, what: str = "vector") -> Vector:
    """Return ``values`` as a finite 1-D float64 array."""

    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{what} must be 1-D, got shape {arr.shape}")
    check_finite(arr, what)
    return arr


def check_finite(arr: np.ndarray, what: str = "value") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite entries in {what}")
    return arr


def check_same_length(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch: {u.shape} vs {v.shape}")


def dot(u: Vector, v: Vector) -> float:
    """Inner product, correctly rounded."""

    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    check_same_length(u, v)
    return math.fsum((u * v).tolist())


def norm(u: Vector) -> float:
    return math.sqrt(dot(u, u))


def cosine(u: Vector, v: Vector) -> float:
    """Cosine of the angle between ``u`` and ``v``.

    A vector with norm below ``ZERO_NORM`` has no direction; the result is
    then 0 and a warning is logged instead of raising.
    """

    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    check_same_length(u, v)
    nu = norm(u)
    nv = norm(v)
    if nu < ZERO_NORM or nv < ZERO_NORM:
        logger.warning("cosine: zero-norm vector, returning 0")
        return 0.0
    value = dot(u, v) / (nu * nv)
    return min(1.0, max(-1.0, value))


def softmax(scores: Vector) -> Vector:
    """Max-subtracted softmax of a score vector."""

    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ShapeError("softmax of an empty vector")
    check_finite(scores, "softmax scores")
    shifted = np.exp(scores - scores.max())
    return shifted / shifted.sum()


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax along the last axis with masked-out entries exactly 0.

    ``mask`` is boolean (or 0/1) with the same shape as ``logits``; each row
    needs at least one True entry.
    """

    logits = np.asarray(logits, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if logits.shape != mask.shape:
        raise ShapeError(f"mask shape {mask.shape} != logits shape {logits.shape}")
    if not np.all(mask.any(axis=-1)):
        raise ShapeError("masked softmax needs at least one available entry")
    masked = np.where(mask, logits, -np.inf)
    shifted = np.exp(masked - masked.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def entropy(probs: Vector) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    nz = probs[probs > 0]
    return -math.fsum((nz * np.log(nz)).tolist())


def kl_divergence(p: Vector, q: Vector) -> float:
    """KL(p || q) for distributions with q > 0 wherever p > 0."""

    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    check_same_length(p, q)
    nz = p > 0
    return math.fsum((p[nz] * np.log(p[nz] / q[nz])).tolist())


def check_simplex(probs: Vector, tol: float = SIMPLEX_TOL) -> Vector:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size == 0:
        raise ShapeError("probability vector must be 1-D and nonempty")
    if np.any(probs < 0) or abs(math.fsum(probs.tolist()) - 1.0) > tol:
        raise NumericalError("probabilities are off the simplex")
    return probs


def categorical_sample(probs: Vector, rng: Rng) -> int:
    """Draw an index with probability ``probs[i]``.

    One uniform draw ``u`` is taken and the first index whose cumulative
    probability exceeds ``u`` is returned, scanning in index order. Trailing
    zero-probability entries are never returned.
    """

    probs = check_simplex(probs)
    u = rng.uniform()
    cumulative = 0.0
    last = 0
    for i, p in enumerate(probs.tolist()):
        if p <= 0.0:
            continue
        last = i
        cumulative += p
        if u < cumulative:
            return i
    # rounding left u above the final cumulative sum
    return last


class Rng:
    """Seeded generator owned by exactly one component.

    ``Rng(seed)`` is the root; ``Rng(seed).stream("train_batches")`` gives
    the documented sub-stream. Two instances built from the same seed and
    stream produce bit-identical draws.
    """

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()) -> None:
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self.spawn_key = tuple(spawn_key)
        self._seedseq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(self._seedseq))
        self.draws = 0

    def stream(self, name: str | int) -> Rng:
        key = STREAMS[name] if isinstance(name, str) else int(name)
        return Rng(self.seed, self.spawn_key + (key,))

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def integers(self, high: int, size: int | None = None) -> Any:
        """Uniform integers in ``[0, high)``."""

        self.draws += 1
        if size is None:
            return int(self._gen.integers(0, high))
        return self._gen.integers(0, high, size=size)

    def normal(self, size: int | tuple[int, ...], scale: float = 1.0) -> np.ndarray:
        self.draws += 1
        return self._gen.normal(0.0, scale, size=size)

    def uniform_array(
        self, low: float, high: float, size: int | tuple[int, ...]
    ) -> np.ndarray:
        self.draws += 1
        return self._gen.uniform(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        self.draws += 1
        return self._gen.permutation(n)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        self.draws += 1
        return self._gen.choice(n, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, spawn_key={self.spawn_key}, draws={self.draws})"


def glorot_uniform(rng: Rng, fan_in: int, fan_out: int, shape: tuple[int, ...]):
    """uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))."""

    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform_array(-a, a, shape)


# EOF
