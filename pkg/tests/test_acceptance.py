# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Desk-scale reproduction runs; minutes each, enabled with DDS_SLOW_TESTS=1."""

from __future__ import annotations

import tempfile
import unittest

import numpy as np

from dds_trainer.config.app import get_bool_env, get_logger
from dds_trainer.config.run import load_config
from dds_trainer.data.loader import build_datasets
from dds_trainer.engine.baseline import baseline_train
from dds_trainer.engine.dds import dds_train
from dds_trainer.engine.group import group_dds_train
from dds_trainer.lib.utils import MetricsWriter

logger = get_logger("tests.acceptance")

SLOW = get_bool_env("DDS_SLOW_TESTS", False)
SEEDS = range(5)


def _fixture(name: str, seed: int):
    cfg = load_config(f"dds_trainer:fixtures/{name}.yaml").with_overrides(seed=seed)
    train, dev = build_datasets(cfg.require_data(), cfg.seed)
    return cfg, train, dev


@unittest.skipUnless(SLOW, "set DDS_SLOW_TESTS=1 to run desk-scale reproductions")
class TestNoisyLabels(unittest.TestCase):
    def test_dds_against_baseline(self) -> None:
        dds_acc, base_acc, ratios = [], [], []
        for seed in SEEDS:
            cfg, train, dev = _fixture("train_noisy", seed)
            base_cfg, _, _ = _fixture("baseline_noisy", seed)
            result = dds_train(cfg, train, dev)
            dds_acc.append(result.dev_acc)
            base_acc.append(baseline_train(base_cfg, train, dev).dev_acc)
            ratios.append(result.weight_report.corrupted_clean_ratio)
        gain = float(np.mean(dds_acc) - np.mean(base_acc))
        logger.info(
            f"noisy labels: dds {np.mean(dds_acc):.4f} vs baseline {np.mean(base_acc):.4f} "
            f"(gain {100 * gain:+.2f} points), corrupted/clean weight ratio "
            f"{np.mean(ratios):.3f}"
        )
        self.assertLessEqual(float(np.mean(ratios)), 0.75)
        self.assertGreaterEqual(gain, 0.02)


@unittest.skipUnless(SLOW, "set DDS_SLOW_TESTS=1 to run desk-scale reproductions")
class TestClassRebalancing(unittest.TestCase):
    def test_weighted_distribution_is_closer_to_uniform(self) -> None:
        for seed in SEEDS:
            with self.subTest(seed=seed):
                cfg, train, dev = _fixture("train_imbalance", seed)
                report = dds_train(cfg, train, dev).weight_report
                self.assertLess(report.weighted_kl_to_uniform, report.raw_kl_to_uniform)


@unittest.skipUnless(SLOW, "set DDS_SLOW_TESTS=1 to run desk-scale reproductions")
class TestGroupUpweighting(unittest.TestCase):
    def test_dev_group_gains_mass(self) -> None:
        for seed in SEEDS:
            with self.subTest(seed=seed):
                cfg, train, dev = _fixture("group_shift", seed)
                result = group_dds_train(cfg, train, dev)
                n = len(result.final_probs)
                self.assertGreater(result.final_probs[0], 1.5 / n)
                self.assertGreater(result.final_probs[0], result.initial_probs[0])

    def test_prior_on_shifted_group_decays(self) -> None:
        for seed in SEEDS:
            with self.subTest(seed=seed):
                cfg, train, dev = _fixture("group_shift_prior", seed)
                result = group_dds_train(cfg, train, dev)
                self.assertLess(result.final_probs[3], result.initial_probs[3])


@unittest.skipUnless(SLOW, "set DDS_SLOW_TESTS=1 to run desk-scale reproductions")
class TestRetrained(unittest.TestCase):
    def test_second_phase_does_not_regress(self) -> None:
        cfg, train, dev = _fixture("train_retrained", 0)
        result = dds_train(cfg, train, dev)
        logger.info(f"retrained phases: {result.phase_dev_acc}")
        self.assertGreaterEqual(result.phase_dev_acc[2], result.phase_dev_acc[1] - 0.005)


@unittest.skipUnless(SLOW, "set DDS_SLOW_TESTS=1 to run desk-scale reproductions")
class TestDeterminism(unittest.TestCase):
    def test_metrics_are_byte_identical(self) -> None:
        cfg, train, dev = _fixture("train_noisy", 1)
        with tempfile.TemporaryDirectory() as tmp:
            blobs = []
            for name in ("a", "b"):
                path = f"{tmp}/{name}.jsonl"
                with MetricsWriter(path) as metrics:
                    dds_train(cfg, train, dev, metrics)
                with open(path, "rb") as f:
                    blobs.append(f.read())
        self.assertGreater(len(blobs[0]), 0)
        self.assertEqual(blobs[0], blobs[1])


if __name__ == "__main__":
    unittest.main()
