# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

import json
import os
import re
import tempfile
import unittest
from unittest import mock

import numpy as np

from dds_trainer.config.app import get_bool_env, get_log_level
from dds_trainer.engine import get_engine, register_default_engines, set_engine
from dds_trainer.lib.debugger import SelectiveDebugger
from dds_trainer.lib.exceptions import ConfigError, DatasetError, NumericalError
from dds_trainer.lib.utils import (
    MetricsWriter,
    provenance_string,
    resources_to_paths,
    to_json,
)


class TestMetricsWriter(unittest.TestCase):
    def test_json_lines(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = f"{tmp}/sub/metrics.jsonl"
            with MetricsWriter(path) as writer:
                writer.write({"step": 1, "dev_loss": np.float64(0.5)})
                writer.write({"step": 2, "weights": np.array([0.25, 0.75])})
            with open(path) as f:
                rows = [json.loads(line) for line in f]
        self.assertEqual(rows, [{"step": 1, "dev_loss": 0.5}, {"step": 2, "weights": [0.25, 0.75]}])
        self.assertEqual(writer.records, 2)

    def test_steps_must_increase(self) -> None:
        writer = MetricsWriter(None)
        writer.write({"round": 1})
        with self.assertRaises(ValueError):
            writer.write({"round": 1})

    def test_empty_file_on_open(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = f"{tmp}/metrics.jsonl"
            with MetricsWriter(path):
                pass
            self.assertEqual(os.path.getsize(path), 0)


class TestHelpers(unittest.TestCase):
    def test_provenance_string(self) -> None:
        text = provenance_string("ab" * 32)
        self.assertRegex(text, r"^dds-trainer@[^+]+\+cfg\.abababababab$")

    def test_resources_to_paths(self) -> None:
        (path,) = resources_to_paths(["dds_trainer:fixtures"])
        self.assertTrue((path / "gradcheck.yaml").exists())
        (plain,) = resources_to_paths(["/tmp/x.yaml"])
        self.assertEqual(str(plain), "/tmp/x.yaml")

    def test_to_json_rejects_unknown_objects(self) -> None:
        self.assertEqual(json.loads(to_json({"a": np.int64(3)})), {"a": 3})
        with self.assertRaises(TypeError):
            to_json({"a": object()})

    def test_env_flags(self) -> None:
        with mock.patch.dict(os.environ, {"DDS_CLI_IPDB": "yes", "DDS_LOG_LEVEL": "debug"}):
            self.assertTrue(get_bool_env("DDS_CLI_IPDB", False))
            self.assertEqual(get_log_level(), "DEBUG")
        with mock.patch.dict(os.environ, {"DDS_LOG_LEVEL": "verbose"}):
            self.assertEqual(get_log_level(), "INFO")


class TestEngineRegistry(unittest.TestCase):
    def test_default_engines(self) -> None:
        register_default_engines()
        for name in ("dds", "baseline", "group_dds"):
            self.assertTrue(callable(get_engine(name)))

    def test_unknown_engine(self) -> None:
        with self.assertRaises(ConfigError) as ctx:
            get_engine("nope")
        self.assertEqual(ctx.exception.path, "engine")

    def test_set_engine(self) -> None:
        def fake(cfg, train, dev, metrics=None):  # noqa: ANN001
            return None

        set_engine("fake", fake)
        self.assertIs(get_engine("fake"), fake)


class _FakeDebugger:
    def __init__(self) -> None:
        self.calls = 0

    def post_mortem(self, traceback=None):  # noqa: ANN001
        self.calls += 1


class TestSelectiveDebugger(unittest.TestCase):
    def test_user_errors_are_skipped(self) -> None:
        debugger = SelectiveDebugger(_FakeDebugger())
        self.assertFalse(debugger.wants(ConfigError("bad")))
        self.assertFalse(debugger.wants(DatasetError("bad", line=3)))
        self.assertTrue(debugger.wants(NumericalError("nan")))
        self.assertFalse(debugger.wants(None))

    def test_post_mortem_only_for_program_faults(self) -> None:
        fake = _FakeDebugger()
        debugger = SelectiveDebugger(fake)
        try:
            raise ConfigError("bad", path="seed")
        except ConfigError as exc:
            debugger.post_mortem(exc.__traceback__)
        self.assertEqual(fake.calls, 0)
        try:
            raise NumericalError("nan")
        except NumericalError as exc:
            debugger.post_mortem(exc.__traceback__)
        self.assertEqual(fake.calls, 1)
        self.assertEqual(debugger.sessions, 1)

    def test_error_message_has_line(self) -> None:
        self.assertTrue(re.search(r"line 7", str(DatasetError("bad row", line=7))))


if __name__ == "__main__":
    unittest.main()
