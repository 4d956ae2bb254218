# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

import math
import unittest
from typing import Any

import numpy as np

from dds_trainer.config.run import RunConfig, build_config
from dds_trainer.data import Dataset, gen_blobs, holdout_split, inject_label_noise
from dds_trainer.engine.baseline import baseline_train
from dds_trainer.engine.dds import (
    BatchSampler,
    DdsState,
    DdsStepReport,
    dds_train,
    dds_train_step,
    dev_gradient,
    example_rewards,
    init_theta,
    scorer_gradient,
    taylor_reward,
    taylor_rewards,
    weight_report,
    weighted_gradient,
)
from dds_trainer.engine.optim import OptimizerState
from dds_trainer.lib.exceptions import ConfigError, NumericalError, ShapeError
from dds_trainer.lib.numeric import Rng
from dds_trainer.models import ExampleScorer, MlpClassifier
from dds_trainer.verify import central_difference


class _Recorder:
    def __init__(self) -> None:
        self.rows: list[dict[str, Any]] = []

    def write(self, row: dict[str, Any]) -> None:
        self.rows.append(row)


def _config(**sections: Any) -> RunConfig:
    raw: dict[str, Any] = {
        "schema_version": 1,
        "engine": "dds",
        "seed": 0,
        "log_every": 1000,
        "model": {"hidden": 4},
        "optimizer": {"kind": "sgd", "lr": 0.1},
        "scorer": {"hidden": 3, "optimizer": {"kind": "adam", "lr": 0.01}},
        "dds": {"batch_size": 8, "steps": 20},
    }
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key] = {**raw[key], **value}
        else:
            raw[key] = value
    return build_config(raw)


def _task(noise: float = 0.0):
    full = gen_blobs(d=3, c=3, n_per_class=20, spread=1.5, seed=4)
    train, dev = holdout_split(full, 0.25, seed=4)
    if noise:
        train = inject_label_noise(train, noise, seed=4)
    return train, dev


class TestGradients(unittest.TestCase):
    def setUp(self) -> None:
        self.model = MlpClassifier(2, 3, 2)
        self.theta = self.model.init_params(Rng(1).stream("init_model"))

    def test_single_example_dev_gradient(self) -> None:
        x = np.array([[0.3, -1.2]])
        grad = dev_gradient(self.model, self.theta, x, [1])
        np.testing.assert_array_equal(grad, self.model.loss_grad(self.theta, x[0], 1))

    def test_opposite_labels_cancel_at_zero(self) -> None:
        model = MlpClassifier(1, 0, 2)
        X = np.array([[0.7], [0.7]])
        grad = dev_gradient(model, np.zeros(model.n_params), X, [0, 1])
        np.testing.assert_allclose(grad, np.zeros(model.n_params), rtol=0, atol=1e-15)

    def test_dev_gradient_matches_finite_differences(self) -> None:
        X = Rng(2).normal((5, 2))
        y = np.array([0, 1, 1, 0, 1])
        grad = dev_gradient(self.model, self.theta, X, y)
        fd = central_difference(lambda t: self.model.mean_loss(t, X, y), self.theta, 1e-5)
        np.testing.assert_allclose(grad, fd, rtol=0, atol=1e-8)

    def test_empty_dev_batch(self) -> None:
        with self.assertRaises(ShapeError):
            dev_gradient(self.model, self.theta, np.zeros((0, 2)), [])

    def test_weighted_gradient(self) -> None:
        grads = np.array([[1.0, 2.0], [3.0, -4.0]])
        np.testing.assert_array_equal(weighted_gradient(grads, [0.25, 0.75]), [2.5, -2.5])
        with self.assertRaises(ShapeError):
            weighted_gradient(grads, [1.0])


class TestRewards(unittest.TestCase):
    def test_dot_rewards(self) -> None:
        rewards = example_rewards(
            np.array([1.0, 0.0]), np.array([[2.0, 0.0], [0.0, 3.0]]), np.full(2, 0.1)
        )
        np.testing.assert_allclose(rewards, [0.2, 0.0], rtol=0, atol=1e-15)

    def test_aligned_and_opposed(self) -> None:
        d_theta = np.array([1.0, 1.0])
        grads = np.array([[2.0, 2.0], [-1.0, -1.0]])
        rewards = example_rewards(d_theta, grads, np.ones(2))
        self.assertGreater(rewards[0], 0.0)
        self.assertLess(rewards[1], 0.0)

    def test_cosine_rewards(self) -> None:
        rewards = example_rewards(
            np.array([1.0, 0.0]),
            np.array([[5.0, 0.0], [0.0, 3.0], [-2.0, 0.0]]),
            np.full(2, 0.1),
            metric="cosine",
        )
        np.testing.assert_allclose(rewards, [1.0, 0.0, -1.0], rtol=0, atol=1e-15)

    def test_reward_errors(self) -> None:
        with self.assertRaises(ShapeError):
            example_rewards(np.zeros(2), np.zeros((3, 4)), np.ones(2))
        with self.assertRaises(ConfigError):
            example_rewards(np.zeros(2), np.zeros((3, 2)), np.ones(2), metric="l2")

    def test_taylor_reward_on_square(self) -> None:
        theta = np.array([1.0])
        value = taylor_reward(lambda t: float(t[0] ** 2), theta, np.array([1.0]), 0.005)
        self.assertAlmostEqual(value, 2.005, places=9)
        np.testing.assert_array_equal(theta, [1.0])
        with self.assertRaises(ConfigError):
            taylor_reward(lambda t: 0.0, theta, np.array([1.0]), 0.0)

    def test_taylor_tracks_exact_rewards(self) -> None:
        model = MlpClassifier(3, 4, 3)
        theta = model.init_params(Rng(3).stream("init_model"))
        X = Rng(3).normal((6, 3))
        y = np.array([0, 1, 2, 0, 1, 2])
        v = 0.1 * Rng(4).normal(model.n_params)
        exact = model.per_example_grads(theta, X, y) @ v
        approx = taylor_rewards(model, theta, v, X, y, 1e-5)
        self.assertLessEqual(np.max(np.abs(approx - exact)), 1e-2 * np.max(np.abs(exact)))


class TestScorerGradient(unittest.TestCase):
    def setUp(self) -> None:
        self.scorer = ExampleScorer(2, 3)
        self.psi = self.scorer.init_params(Rng(5).stream("init_scorer"))
        self.X = Rng(5).normal((4, 2))

    def test_zero_rewards(self) -> None:
        for weighting in ("uniform", "scorer"):
            d_psi = scorer_gradient(self.scorer, self.psi, self.X, np.zeros(4), weighting)
            np.testing.assert_array_equal(d_psi, np.zeros(self.scorer.n_params))

    def test_single_example_batch(self) -> None:
        d_psi = scorer_gradient(self.scorer, self.psi, self.X[:1], np.array([3.0]))
        np.testing.assert_array_equal(d_psi, np.zeros(self.scorer.n_params))

    def test_equal_rewards_under_scorer_weighting(self) -> None:
        d_psi = scorer_gradient(self.scorer, self.psi, self.X, np.full(4, 2.0), "scorer")
        np.testing.assert_allclose(d_psi, np.zeros(self.scorer.n_params), rtol=0, atol=1e-12)

    def test_linear_in_rewards(self) -> None:
        r1 = np.array([0.5, -1.0, 0.2, 0.0])
        r2 = np.array([1.0, 2.0, -3.0, 0.7])
        for weighting in ("uniform", "scorer"):
            whole = scorer_gradient(self.scorer, self.psi, self.X, r1 + 2 * r2, weighting)
            parts = scorer_gradient(self.scorer, self.psi, self.X, r1, weighting)
            parts += 2 * scorer_gradient(self.scorer, self.psi, self.X, r2, weighting)
            np.testing.assert_allclose(whole, parts, rtol=0, atol=1e-12)

    def test_positive_reward_raises_its_weight(self) -> None:
        rewards = np.array([1.0, 0.0, 0.0, 0.0])
        d_psi = scorer_gradient(self.scorer, self.psi, self.X, rewards)
        before = self.scorer.batch_probs(self.psi, self.X)[0]
        after = self.scorer.batch_probs(self.psi + 1e-3 * d_psi, self.X)[0]
        self.assertGreater(after, before)

    def test_errors(self) -> None:
        with self.assertRaises(ShapeError):
            scorer_gradient(self.scorer, self.psi, self.X, np.zeros(3))
        with self.assertRaises(ConfigError):
            scorer_gradient(self.scorer, self.psi, self.X, np.zeros(4), "softmax")


class TestTrainStep(unittest.TestCase):
    def setUp(self) -> None:
        self.model = MlpClassifier(2, 3, 2)
        self.scorer = ExampleScorer(2, 2)
        self.cfg = _config()
        rng = Rng(6)
        self.state = DdsState(
            theta=self.model.init_params(rng.stream("init_model")),
            psi=self.scorer.init_params(rng.stream("init_scorer")),
            opt_theta=OptimizerState.zeros(self.model.n_params),
            opt_psi=OptimizerState.zeros(self.scorer.n_params),
        )
        self.batch = (rng.normal((4, 2)), np.array([0, 1, 0, 1]))
        self.dev_batch = (rng.normal((3, 2)), np.array([1, 0, 1]))

    def _step(self, batch=None, update_scorer: bool = True) -> DdsStepReport:
        return dds_train_step(
            self.model,
            self.scorer,
            self.state,
            self.cfg.optimizer,
            self.cfg.scorer.optimizer,
            batch or self.batch,
            self.dev_batch,
            self.cfg.dds,
            update_scorer=update_scorer,
        )

    def test_step_report(self) -> None:
        theta0 = self.state.theta.copy()
        report = self._step()
        self.assertEqual(report.step, 1)
        self.assertEqual(self.state.t, 1)
        self.assertAlmostEqual(float(report.weights.sum()), 1.0, delta=1e-12)
        self.assertEqual(report.rewards.shape, (4,))
        self.assertFalse(np.array_equal(self.state.theta, theta0))

    def test_theta_step_uses_pre_step_gradients(self) -> None:
        X, y = self.batch
        theta0 = self.state.theta.copy()
        weights = self.scorer.batch_probs(self.state.psi, X)
        g = weighted_gradient(self.model.per_example_grads(theta0, X, y), weights)
        self._step()
        np.testing.assert_allclose(self.state.theta, theta0 - 0.1 * g, rtol=0, atol=1e-15)

    def test_single_example_batch_leaves_scorer_unchanged(self) -> None:
        psi0 = self.state.psi.copy()
        report = self._step(batch=(self.batch[0][:1], self.batch[1][:1]))
        np.testing.assert_array_equal(self.state.psi, psi0)
        np.testing.assert_array_equal(report.weights, [1.0])

    def test_frozen_step_keeps_scorer_and_optimizer(self) -> None:
        psi0 = self.state.psi.copy()
        report = self._step(update_scorer=False)
        np.testing.assert_array_equal(self.state.psi, psi0)
        self.assertEqual(self.state.opt_psi.t, 0)
        self.assertIsNotNone(report.d_psi)

    def test_report_rejects_off_simplex_weights(self) -> None:
        with self.assertRaises(NumericalError):
            DdsStepReport(
                step=1,
                train_loss=0.0,
                dev_loss=0.0,
                rewards=np.zeros(2),
                weights=np.array([0.7, 0.7]),
                grad_norm_theta=0.0,
                grad_norm_dev=0.0,
                grad_norm_psi=0.0,
            )


class TestBatchSampler(unittest.TestCase):
    def test_without_replacement_inside_batch(self) -> None:
        sampler = BatchSampler(10, 10, Rng(0).stream("train_batches"))
        for _ in range(5):
            self.assertEqual(sorted(sampler.next().tolist()), list(range(10)))

    def test_with_replacement_when_batch_exceeds_data(self) -> None:
        rows = BatchSampler(3, 20, Rng(0)).next()
        self.assertEqual(rows.shape, (20,))
        self.assertTrue(np.all((rows >= 0) & (rows < 3)))

    def test_same_stream_same_batches(self) -> None:
        a = BatchSampler(50, 8, Rng(2).stream("train_batches"))
        b = BatchSampler(50, 8, Rng(2).stream("train_batches"))
        for _ in range(3):
            np.testing.assert_array_equal(a.next(), b.next())

    def test_errors(self) -> None:
        with self.assertRaises(ShapeError):
            BatchSampler(0, 4, Rng(0))
        with self.assertRaises(ShapeError):
            BatchSampler(4, 0, Rng(0))


class TestDdsTrain(unittest.TestCase):
    def test_uniform_scorer_retraces_baseline(self) -> None:
        train, dev = _task()
        cfg = _config(
            optimizer={"kind": "momentum", "lr": 0.05},
            scorer={"zero_head": True, "frozen": True},
            dds={"batch_size": 8, "steps": 100},
        )
        dds_rows, base_rows = _Recorder(), _Recorder()
        dds = dds_train(cfg, train, dev, dds_rows)
        base = baseline_train(cfg, train, dev, base_rows)
        np.testing.assert_array_equal(dds.theta, base.theta)
        self.assertEqual(dds.dev_acc, base.dev_acc)
        self.assertEqual(
            [r["train_loss"] for r in dds_rows.rows], [r["train_loss"] for r in base_rows.rows]
        )
        self.assertEqual(
            [r["dev_loss"] for r in dds_rows.rows], [r["dev_loss"] for r in base_rows.rows]
        )

    def test_zero_steps(self) -> None:
        train, dev = _task()
        cfg = _config(dds={"steps": 0})
        rows = _Recorder()
        result = dds_train(cfg, train, dev, rows)
        self.assertEqual(result.steps, 0)
        self.assertEqual(rows.rows, [])
        model = MlpClassifier(train.d, 4, train.c)
        np.testing.assert_array_equal(result.theta, init_theta(model, 0))

    def test_same_seed_same_run(self) -> None:
        train, dev = _task(noise=0.2)
        cfg = _config()
        a = dds_train(cfg, train, dev)
        b = dds_train(cfg, train, dev)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.psi, b.psi)
        c = dds_train(cfg.with_overrides(seed=1), train, dev)
        self.assertFalse(np.array_equal(a.theta, c.theta))

    def test_metrics_rows(self) -> None:
        train, dev = _task()
        rows = _Recorder()
        dds_train(_config(dds={"steps": 5}), train, dev, rows)
        self.assertEqual([r["step"] for r in rows.rows], [1, 2, 3, 4, 5])
        for key in ("train_loss", "dev_loss", "dev_acc", "mean_reward", "weights_entropy"):
            self.assertIn(key, rows.rows[0])
        self.assertNotIn("phase", rows.rows[0])

    def test_taylor_and_cosine_variants_run(self) -> None:
        train, dev = _task()
        for dds in (
            {"taylor": {"enabled": True, "eps": 1.0e-4}},
            {"reward": "cosine", "weighting": "scorer"},
        ):
            with self.subTest(dds=dds):
                result = dds_train(_config(dds=dds), train, dev)
                self.assertEqual(result.steps, 20)
                self.assertTrue(np.all(np.isfinite(result.psi)))

    def test_label_head_scorer_run(self) -> None:
        train, dev = _task(noise=0.2)
        result = dds_train(_config(scorer={"label_heads": True}), train, dev)
        self.assertEqual(result.steps, 20)
        self.assertEqual(result.psi.size, 3 * 3 + 3 + 3 * 3 + 3)
        self.assertTrue(np.all(np.isfinite(result.psi)))
        self.assertIsNotNone(result.weight_report.corrupted_clean_ratio)

    def test_retrained_mode(self) -> None:
        train, dev = _task()
        rows = _Recorder()
        cfg = _config(dds={"steps": 6, "mode": "retrained", "retrain_freeze_steps": 6})
        result = dds_train(cfg, train, dev, rows)
        self.assertEqual(result.steps, 12)
        self.assertEqual([r["phase"] for r in rows.rows], [1] * 6 + [2] * 6)
        self.assertEqual([r["step"] for r in rows.rows], list(range(1, 13)))
        self.assertEqual(set(result.phase_dev_acc), {1, 2})
        # scorer frozen for all of phase 2: it ends where a plain run ends
        plain = dds_train(_config(dds={"steps": 6}), train, dev)
        np.testing.assert_array_equal(result.psi, plain.psi)


class TestWeightReport(unittest.TestCase):
    def test_label_heads_score_by_label(self) -> None:
        train = Dataset(
            features=np.ones((4, 3)),
            labels=[0, 0, 1, 1],
            groups=[0] * 4,
            corrupted=[False, False, True, True],
            c=2,
            n=1,
        )
        scorer = ExampleScorer(3, 0, classes=2)
        psi = np.zeros(scorer.n_params)
        psi[-1] = -math.log(2.0)
        report = weight_report(scorer, psi, train)
        self.assertAlmostEqual(report.corrupted_clean_ratio, 0.5, places=12)
        np.testing.assert_allclose(
            report.weighted_class_distribution, [2 / 3, 1 / 3], rtol=0, atol=1e-12
        )

    def test_uniform_scorer_report(self) -> None:
        train, _ = _task(noise=0.25)
        scorer = ExampleScorer(train.d, 2)
        psi = scorer.init_params(Rng(0), zero_head=True)
        report = weight_report(scorer, psi, train)
        self.assertAlmostEqual(report.corrupted_clean_ratio, 1.0, places=12)
        np.testing.assert_allclose(
            report.weighted_class_distribution, report.raw_class_distribution, rtol=0, atol=1e-12
        )
        self.assertAlmostEqual(report.weighted_kl_to_uniform, report.raw_kl_to_uniform, places=12)
        self.assertIn("corrupted_clean_ratio", report.as_dict())

    def test_clean_data_has_no_ratio(self) -> None:
        train, _ = _task()
        scorer = ExampleScorer(train.d, 0)
        report = weight_report(scorer, np.zeros(scorer.n_params), train)
        self.assertIsNone(report.mean_weight_corrupted)
        self.assertIsNone(report.corrupted_clean_ratio)
        self.assertIsNotNone(report.mean_weight_clean)


if __name__ == "__main__":
    unittest.main()
