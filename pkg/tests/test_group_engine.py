# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

import math
import unittest
from typing import Any

import numpy as np

from dds_trainer.config.run import RunConfig, build_config
from dds_trainer.data import Dataset, gen_group_shift
from dds_trainer.engine.group import (
    GroupGradientTable,
    clip_gradient,
    ema_update,
    group_dds_train,
    group_rewards,
    load_data,
    scorer_inner_loop,
    snapshot,
)
from dds_trainer.engine.optim import OptimizerConfig, OptimizerState
from dds_trainer.lib.exceptions import ConfigError, DatasetError, ShapeError
from dds_trainer.lib.numeric import Rng, softmax
from dds_trainer.models import GroupScorer


def _config(group: dict[str, Any] | None = None, **extra: Any) -> RunConfig:
    raw: dict[str, Any] = {
        "schema_version": 1,
        "engine": "group_dds",
        "log_every": 1000,
        "model": {"hidden": 4},
        "optimizer": {"kind": "sgd", "lr": 0.05},
        "scorer": {"optimizer": {"kind": "adam", "lr": 0.05}},
        "group_dds": {"K": 20, "E": 2, "B": 8, "rounds": 3, "dev_batch": 8, "scorer_hidden": 4},
        **extra,
    }
    raw["group_dds"] |= group or {}
    return build_config(raw)


class TestGradientTable(unittest.TestCase):
    def test_ema_examples(self) -> None:
        table = GroupGradientTable.zeros(2, 2, alpha1=0.9, alpha2=0.1)
        first = ema_update(table, 0, np.array([1.0, 2.0]))
        np.testing.assert_allclose(first.grads[0], [0.1, 0.2], rtol=0, atol=1e-15)
        np.testing.assert_array_equal(first.grads[1], [0.0, 0.0])
        np.testing.assert_array_equal(table.grads, np.zeros((2, 2)))
        second = ema_update(first, 0, np.array([1.0, 2.0]))
        np.testing.assert_allclose(second.grads[0], [0.19, 0.38], rtol=0, atol=1e-15)

    def test_frozen_table(self) -> None:
        table = GroupGradientTable(grads=np.array([[1.0, -1.0]]), alpha1=1.0, alpha2=0.0)
        for _ in range(5):
            table = ema_update(table, 0, np.array([7.0, 7.0]))
        np.testing.assert_array_equal(table.grads, [[1.0, -1.0]])
        self.assertEqual(table.norm_bound(5.0), math.inf)

    def test_entries_stay_within_bound(self) -> None:
        table = GroupGradientTable.zeros(3, 4, alpha1=0.9, alpha2=0.1)
        rng = Rng(0)
        for _ in range(300):
            grad = clip_gradient(10.0 * rng.normal(4), 5.0)
            table = ema_update(table, int(rng.integers(3)), grad)
        bound = table.norm_bound(5.0)
        self.assertAlmostEqual(bound, 5.0, places=12)
        self.assertTrue(np.all(np.linalg.norm(table.grads, axis=1) <= bound + 1e-9))

    def test_update_errors(self) -> None:
        table = GroupGradientTable.zeros(2, 3, alpha1=0.5, alpha2=0.5)
        with self.assertRaises(ShapeError):
            ema_update(table, 2, np.zeros(3))
        with self.assertRaises(ShapeError):
            ema_update(table, 0, np.zeros(2))
        with self.assertRaises(ConfigError):
            GroupGradientTable.zeros(2, 3, alpha1=1.5, alpha2=0.0)
        with self.assertRaises(ShapeError):
            table.with_dev(np.zeros(4))

    def test_clip_gradient(self) -> None:
        np.testing.assert_allclose(
            clip_gradient(np.array([3.0, 4.0]), 1.0), [0.6, 0.8], rtol=0, atol=1e-15
        )
        small = np.array([0.3, 0.4])
        np.testing.assert_array_equal(clip_gradient(small, 1.0), small)


class TestGroupRewards(unittest.TestCase):
    def setUp(self) -> None:
        grads = np.array([[1.0, 0.0], [0.0, 1.0], [-2.0, 0.0]])
        self.table = GroupGradientTable(grads=grads, alpha1=0.9, alpha2=0.1)

    def test_cosine_and_dot(self) -> None:
        table = self.table.with_dev(np.array([1.0, 0.0]))
        np.testing.assert_array_equal(group_rewards(table, "cosine"), [1.0, 0.0, -1.0])
        np.testing.assert_array_equal(group_rewards(table, "dot"), [1.0, 0.0, -2.0])

    def test_cosine_ignores_dev_gradient_scale(self) -> None:
        dev = np.array([0.6, -0.8])
        unit = group_rewards(self.table.with_dev(dev), "cosine")
        np.testing.assert_allclose(
            group_rewards(self.table.with_dev(40.0 * dev), "cosine"), unit, rtol=0, atol=1e-12
        )

    def test_scorer_gradient_is_linear_in_rewards(self) -> None:
        scorer = GroupScorer(3, 4)
        omega = scorer.init_params(Rng(6))
        A = np.array([[1.0, 1.0, 1.0], [1.0, 0.0, 1.0]])
        r = np.array([0.3, -1.2, 0.5])
        once = scorer.reward_weighted_grad(omega, A, r)
        self.assertTrue(np.any(once != 0.0))
        np.testing.assert_allclose(
            scorer.reward_weighted_grad(omega, A, 2.5 * r), 2.5 * once, rtol=0, atol=1e-12
        )

    def test_dev_gradient_required(self) -> None:
        with self.assertRaises(ShapeError):
            group_rewards(self.table)

    def test_unknown_metric(self) -> None:
        with self.assertRaises(ConfigError):
            group_rewards(self.table.with_dev(np.ones(2)), "l1")


class TestLoadData(unittest.TestCase):
    def test_single_available_group_is_always_chosen(self) -> None:
        ds = Dataset(
            features=np.arange(6.0).reshape(3, 2),
            labels=[0, 1, 0],
            groups=[0, 1, 0],
            corrupted=[False] * 3,
            c=2,
            n=2,
            instances=[[0, -1], [-1, 1], [2, -1]],
        )
        scorer = GroupScorer(2, 3)
        omega = scorer.init_params(Rng(0), prior_logits=[5.0, -5.0])
        pairs = load_data(scorer, omega, ds, 60, Rng(1))
        self.assertEqual(len(pairs), 60)
        for group, row in pairs:
            self.assertEqual(ds.groups[row], group)
        self.assertIn((1, 1), pairs)

    def test_group_frequency_follows_scorer(self) -> None:
        train, _ = gen_group_shift(2, 2, 2, 1.0, 0, seed=0, n_instances=20)
        scorer = GroupScorer(2, 3)
        omega = scorer.init_params(Rng(0), prior_logits=[0.0, math.log(3.0)])
        pairs = load_data(scorer, omega, train, 10_000, Rng(2).stream("group_sampling"))
        freq = sum(1 for group, _ in pairs if group == 1) / len(pairs)
        self.assertGreaterEqual(freq, 0.73)
        self.assertLessEqual(freq, 0.77)

    def test_errors(self) -> None:
        train, _ = gen_group_shift(2, 2, 2, 1.0, 0, seed=0, n_instances=5)
        scorer = GroupScorer(2, 3)
        omega = scorer.init_params(Rng(0))
        with self.assertRaises(ConfigError):
            load_data(scorer, omega, train, 0, Rng(0))
        with self.assertRaises(DatasetError):
            load_data(scorer, omega, train.subset(np.arange(3)), 5, Rng(0))


class TestScorerInnerLoop(unittest.TestCase):
    def test_positive_reward_group_gains_mass(self) -> None:
        scorer = GroupScorer(2, 4)
        omega = scorer.init_params(Rng(3))
        before = snapshot(scorer, omega)
        omega = scorer_inner_loop(
            scorer,
            omega,
            OptimizerState.zeros(scorer.n_params),
            OptimizerConfig(kind="adam", lr=0.05),
            np.ones((10, 2)),
            np.array([1.0, -1.0]),
            E=5,
            B=4,
            rng=Rng(4),
        )
        after = snapshot(scorer, omega)
        self.assertGreater(after[0], before[0])
        self.assertAlmostEqual(float(after.sum()), 1.0, delta=1e-12)

    def test_single_group_never_moves(self) -> None:
        scorer = GroupScorer(1, 2)
        omega = scorer.init_params(Rng(3))
        moved = scorer_inner_loop(
            scorer,
            omega,
            OptimizerState.zeros(scorer.n_params),
            OptimizerConfig(kind="adam", lr=0.05),
            np.ones((4, 1)),
            np.array([0.8]),
            E=3,
            B=2,
            rng=Rng(4),
        )
        np.testing.assert_array_equal(moved, omega)

    def _run(self, scorer: GroupScorer, omega: np.ndarray, grad_vec: np.ndarray) -> np.ndarray:
        return scorer_inner_loop(
            scorer,
            omega,
            OptimizerState.zeros(scorer.n_params),
            OptimizerConfig(kind="adam", lr=0.05),
            np.ones((6, scorer.n)),
            grad_vec,
            E=4,
            B=3,
            rng=Rng(5),
        )

    def test_zero_rewards_leave_scorer_unchanged(self) -> None:
        scorer = GroupScorer(3, 4)
        omega = scorer.init_params(Rng(2), prior_logits=[0.0, 1.0, -1.0])
        np.testing.assert_array_equal(self._run(scorer, omega, np.zeros(3)), omega)

    def test_constant_rewards_keep_uniform_scorer(self) -> None:
        scorer = GroupScorer(4, 4)
        omega = np.zeros(scorer.n_params)
        np.testing.assert_array_equal(self._run(scorer, omega, np.full(4, 0.7)), omega)

    def test_errors(self) -> None:
        scorer = GroupScorer(2, 2)
        with self.assertRaises(ConfigError):
            scorer_inner_loop(
                scorer,
                np.zeros(scorer.n_params),
                OptimizerState.zeros(scorer.n_params),
                OptimizerConfig(),
                np.ones((2, 2)),
                np.zeros(2),
                E=0,
                B=1,
                rng=Rng(0),
            )


class TestGroupTrain(unittest.TestCase):
    def setUp(self) -> None:
        self.train, self.dev = gen_group_shift(
            3, 2, 2, 3.0, dev_group=0, seed=1, n_instances=60, n_dev=20
        )

    def test_small_run(self) -> None:
        rows: list[dict[str, Any]] = []

        class Recorder:
            def write(self, row: dict[str, Any]) -> None:
                rows.append(row)

        result = group_dds_train(_config(), self.train, self.dev, Recorder())
        self.assertEqual(result.rounds, 3)
        self.assertEqual(len(result.trace), 3)
        self.assertEqual([r["round"] for r in rows], [1, 2, 3])
        self.assertEqual(len(rows[0]["grad_vec"]), 3)
        self.assertAlmostEqual(sum(result.final_probs), 1.0, delta=1e-12)
        self.assertEqual(result.final_probs, result.trace[-1])

    def test_same_seed_same_run(self) -> None:
        a = group_dds_train(_config(), self.train, self.dev)
        b = group_dds_train(_config(), self.train, self.dev)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.omega, b.omega)

    def test_prior_logits_set_initial_distribution(self) -> None:
        prior = [0.0, 0.0, 2.0]
        result = group_dds_train(
            _config({"prior_logits": prior, "rounds": 0}), self.train, self.dev
        )
        np.testing.assert_allclose(result.initial_probs, softmax(prior), rtol=0, atol=1e-12)
        self.assertEqual(int(np.argmax(result.initial_probs)), 2)
        self.assertEqual(result.trace, [])

    def test_single_group_scorer_does_not_matter(self) -> None:
        train, dev = gen_group_shift(1, 2, 2, 0.0, 0, seed=2, n_instances=30, n_dev=10)
        free = group_dds_train(_config(), train, dev)
        frozen = group_dds_train(_config(scorer={"frozen": True}), train, dev)
        np.testing.assert_array_equal(free.theta, frozen.theta)
        self.assertEqual(free.final_probs, [1.0])

    def test_group_count_mismatch(self) -> None:
        with self.assertRaises(ConfigError) as ctx:
            group_dds_train(_config({"n": 2}), self.train, self.dev)
        self.assertEqual(ctx.exception.path, "group_dds.n")

    def test_prior_length_must_match_dataset_groups(self) -> None:
        cfg = _config({"prior_logits": [0.0, 1.0]})
        self.assertIsNone(cfg.group_dds.n)
        with self.assertRaises(ConfigError) as ctx:
            group_dds_train(cfg, self.train, self.dev)
        self.assertEqual(ctx.exception.path, "group_dds.prior_logits")
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_needs_alignment(self) -> None:
        flat = self.train.subset(np.arange(len(self.train)))
        with self.assertRaises(DatasetError):
            group_dds_train(_config(), flat, self.dev)


if __name__ == "__main__":
    unittest.main()
