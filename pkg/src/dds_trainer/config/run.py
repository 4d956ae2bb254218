# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""Run configuration: YAML schema, validation and typed config objects.

A run config is a single YAML mapping with ``schema_version: 1``. Every key
is declared in ``RUN_SCHEMA``; unknown keys are rejected and defaults are
filled in before the mapping is turned into the frozen dataclasses below.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import dataclasses
import hashlib
from dataclasses import dataclass, field
from typing import Any

import fsspec
import yaml

from dds_trainer.engine.optim import (
    DEFAULT_LR,
    DEFAULT_SCORER_LR,
    OPTIMIZER_KINDS,
    OptimizerConfig,
)
from dds_trainer.lib.exceptions import ConfigError
from dds_trainer.lib.utils import resources_to_paths
from dds_trainer.lib.validators import OPTIONAL, Schema, Validator as V, validate_mapping

SCHEMA_VERSION = 1
ENGINES = ("dds", "group_dds", "baseline")


def _optimizer_schema(kind: str, lr: float) -> Schema:
    return {
        "kind": V(type=str, default=kind, choices=OPTIMIZER_KINDS),
        "lr": V(type=float, default=lr, min_value=0.0, min_exclusive=True),
        "momentum": V(type=float, default=0.9, min_value=0.0, max_value=1.0, max_exclusive=True),
        "beta2": V(
            type=float,
            default=0.999,
            min_value=0.0,
            max_value=1.0,
            min_exclusive=True,
            max_exclusive=True,
        ),
        "eps": V(type=float, default=1e-8, min_value=0.0, min_exclusive=True),
    }


RUN_SCHEMA: Schema = {
    "schema_version": V(type=int, required=True, choices=(SCHEMA_VERSION,)),
    "engine": V(type=str, required=True, choices=ENGINES),
    "seed": V(type=int, default=0, min_value=0),
    "output_dir": V(type=str, default="runs/default"),
    "log_every": V(type=int, default=100, min_value=1),
    "data": {
        OPTIONAL: True,
        "kind": V(type=str, required=True, choices=("blobs", "group_shift", "csv")),
        "d": V(type=int, default=8, min_value=1),
        "c": V(type=int, default=4, min_value=2),
        "n_per_class": V(type=(int, list), default=250, min_value=1, list_item_type=int, min_length=2),
        "spread": V(type=float, default=1.0, min_value=0.0),
        "scale": V(type=float, default=5.0, min_value=0.0, min_exclusive=True),
        "noise_rate": V(type=float, default=0.0, min_value=0.0, max_value=1.0),
        "dev_per_class": V(type=(int, list), nullable=True, min_value=1, list_item_type=int, min_length=2),
        "dev_fraction": V(type=float, default=0.1, min_value=0.0, max_value=1.0, min_exclusive=True, max_exclusive=True),
        "n_groups": V(type=int, default=4, min_value=1),
        "shift_scale": V(type=float, default=3.0, min_value=0.0),
        "dev_group": V(type=int, default=0, min_value=0),
        "n_instances": V(type=int, default=1000, min_value=1),
        "n_dev": V(type=int, default=200, min_value=1),
        "availability_dropout": V(type=float, default=0.0, min_value=0.0, max_value=1.0, max_exclusive=True),
        "path": V(type=str, nullable=True),
        "dev_path": V(type=str, nullable=True),
    },
    "model": {
        "hidden": V(type=int, default=16, min_value=0, max_value=32),
    },
    "optimizer": _optimizer_schema("sgd", DEFAULT_LR),
    "scorer": {
        "hidden": V(type=int, default=16, min_value=0, max_value=32),
        "zero_head": V(type=bool, default=False),
        "frozen": V(type=bool, default=False),
        "label_heads": V(type=bool, default=False),
        "optimizer": _optimizer_schema("adam", DEFAULT_SCORER_LR),
    },
    "dds": {
        "batch_size": V(type=int, default=32, min_value=1),
        "dev_batch_size": V(type=int, nullable=True, min_value=1),
        "steps": V(type=int, default=1000, min_value=0),
        "reward": V(type=str, default="dot", choices=("dot", "cosine")),
        "weighting": V(type=str, default="uniform", choices=("uniform", "scorer")),
        "taylor": {
            "enabled": V(type=bool, default=False),
            "eps": V(type=float, default=1e-3, min_value=0.0, min_exclusive=True),
        },
        "mode": V(type=str, default="plain", choices=("plain", "retrained")),
        "retrain_freeze_steps": V(type=int, default=0, min_value=0),
    },
    "group_dds": {
        "n": V(type=int, nullable=True, min_value=1),
        "K": V(type=int, default=200, min_value=1),
        "E": V(type=int, default=5, min_value=1),
        "B": V(type=int, default=64, min_value=1),
        "alpha1": V(type=float, default=0.999, min_value=0.0, max_value=1.0, max_exclusive=True),
        "alpha2": V(type=float, nullable=True, min_value=0.0),
        "metric": V(type=str, default="cosine", choices=("cosine", "dot")),
        "prior_logits": V(type=list, nullable=True, list_item_type=float),
        "rounds": V(type=int, default=10, min_value=0),
        "model_batch": V(type=int, default=1, min_value=1),
        "dev_batch": V(type=int, default=64, min_value=1),
        "clip_norm": V(type=float, default=5.0, min_value=0.0, min_exclusive=True),
        "scorer_hidden": V(type=int, default=8, min_value=1, max_value=32),
    },
    "gradcheck": {
        "d": V(type=int, default=2, min_value=1),
        "hidden": V(type=int, default=4, min_value=0),
        "c": V(type=int, default=2, min_value=2),
        "scorer_hidden": V(type=int, default=4, min_value=0),
        "batch_size": V(type=int, default=2, min_value=1),
        "seeds": V(type=int, default=10, min_value=1),
        "h": V(type=float, default=1e-4, min_value=0.0, min_exclusive=True),
        "lr": V(type=float, default=0.1, min_value=0.0, min_exclusive=True),
        "tolerance": V(type=float, default=1e-3, min_value=0.0, min_exclusive=True),
        "adam_tolerance": V(type=float, default=5e-2, min_value=0.0, min_exclusive=True),
        "adam_eps": V(type=float, default=1e-12, min_value=0.0, min_exclusive=True),
        "optimizers": V(
            type=list,
            default=["sgd", "momentum", "adam"],
            list_item_type=str,
            list_item_choices=OPTIMIZER_KINDS,
            min_length=1,
        ),
        "warmup_steps": V(type=int, default=1000, min_value=0),
        "taylor_eps": V(type=list, default=[1e-1, 1e-2, 1e-3], list_item_type=float, min_length=2),
        "markov_steps": V(type=int, default=5, min_value=2),
    },
    "oracle": {
        "train": V(
            type=list,
            default=[[1.0, 0.0, 0], [0.0, 1.0, 1]],
            list_item_type=list,
            min_length=1,
        ),
        "dev": V(type=list, default=[[1.0, 0.0, 0]], list_item_type=list, min_length=1),
        "l2": V(type=float, default=0.1, min_value=0.0, min_exclusive=True),
        "grid_resolution": V(type=int, default=101, min_value=11),
        "tol": V(type=float, default=1e-10, min_value=0.0, min_exclusive=True),
        "max_iter": V(type=int, default=100000, min_value=1),
        "dds_steps": V(type=int, default=500, min_value=0),
        "dds_seeds": V(type=int, default=5, min_value=1),
        "lr": V(type=float, default=0.1, min_value=0.0, min_exclusive=True),
        "scorer_lr": V(type=float, default=0.05, min_value=0.0, min_exclusive=True),
    },
}


@dataclass(frozen=True)
class DataConfig:
    kind: str
    d: int = 8
    c: int = 4
    n_per_class: int | list[int] = 250
    spread: float = 1.0
    scale: float = 5.0
    noise_rate: float = 0.0
    """Label noise injected into the training split only."""
    dev_per_class: int | list[int] | None = None
    """Draw the blobs dev set separately instead of holding out dev_fraction."""
    dev_fraction: float = 0.1
    n_groups: int = 4
    shift_scale: float = 3.0
    dev_group: int = 0
    n_instances: int = 1000
    n_dev: int = 200
    availability_dropout: float = 0.0
    path: str | None = None
    dev_path: str | None = None


@dataclass(frozen=True)
class ModelConfig:
    hidden: int = 16


@dataclass(frozen=True)
class ScorerConfig:
    hidden: int = 16
    zero_head: bool = False
    """Start the output head at zero, so every score starts equal."""
    frozen: bool = False
    """Never update the scorer."""
    label_heads: bool = False
    """One output per class; an example is scored by the output of its label."""
    optimizer: OptimizerConfig = field(
        default_factory=lambda: OptimizerConfig(kind="adam", lr=DEFAULT_SCORER_LR)
    )


@dataclass(frozen=True)
class TaylorConfig:
    enabled: bool = False
    eps: float = 1e-3

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ConfigError("must be > 0", path="dds.taylor.eps")


@dataclass(frozen=True)
class DdsConfig:
    batch_size: int = 32
    dev_batch_size: int | None = None
    """Defaults to batch_size."""
    steps: int = 1000
    reward: str = "dot"
    weighting: str = "uniform"
    taylor: TaylorConfig = field(default_factory=TaylorConfig)
    mode: str = "plain"
    retrain_freeze_steps: int = 0

    @property
    def dev_batch(self) -> int:
        return self.dev_batch_size or self.batch_size


@dataclass(frozen=True)
class GroupDdsConfig:
    n: int | None = None
    K: int = 200
    E: int = 5
    B: int = 64
    alpha1: float = 0.999
    alpha2: float | None = None
    """Defaults to 1 - alpha1."""
    metric: str = "cosine"
    prior_logits: list[float] | None = None
    rounds: int = 10
    model_batch: int = 1
    dev_batch: int = 64
    clip_norm: float = 5.0
    scorer_hidden: int = 8

    def __post_init__(self) -> None:
        if min(self.K, self.E, self.B) < 1:
            raise ConfigError("K, E and B must be >= 1", path="group_dds")
        if not 0.0 <= self.alpha1 < 1.0:
            raise ConfigError("must be in [0, 1)", path="group_dds.alpha1")

    @property
    def ema_alpha2(self) -> float:
        return 1.0 - self.alpha1 if self.alpha2 is None else self.alpha2


@dataclass(frozen=True)
class GradcheckConfig:
    d: int = 2
    hidden: int = 4
    c: int = 2
    scorer_hidden: int = 4
    batch_size: int = 2
    seeds: int = 10
    h: float = 1e-4
    lr: float = 0.1
    tolerance: float = 1e-3
    adam_tolerance: float = 5e-2
    adam_eps: float = 1e-12
    """Adam eps of the checked optimizer; the kernel is exact only where v dominates eps."""
    optimizers: tuple[str, ...] = OPTIMIZER_KINDS
    warmup_steps: int = 1000
    """Optimizer steps replayed before the checked step (momentum, adam)."""
    taylor_eps: tuple[float, ...] = (1e-1, 1e-2, 1e-3)
    markov_steps: int = 5


@dataclass(frozen=True)
class OracleConfig:
    train: tuple[tuple[float, ...], ...] = ((1.0, 0.0, 0), (0.0, 1.0, 1))
    """Rows of features followed by the integer label."""
    dev: tuple[tuple[float, ...], ...] = ((1.0, 0.0, 0),)
    l2: float = 0.1
    grid_resolution: int = 101
    tol: float = 1e-10
    max_iter: int = 100000
    dds_steps: int = 500
    dds_seeds: int = 5
    lr: float = 0.1
    scorer_lr: float = 0.05


@dataclass(frozen=True)
class RunConfig:
    engine: str
    seed: int = 0
    output_dir: str = "runs/default"
    log_every: int = 100
    data: DataConfig | None = None
    model: ModelConfig = field(default_factory=ModelConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    dds: DdsConfig = field(default_factory=DdsConfig)
    group_dds: GroupDdsConfig = field(default_factory=GroupDdsConfig)
    gradcheck: GradcheckConfig = field(default_factory=GradcheckConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    schema_version: int = SCHEMA_VERSION
    digest: str = ""
    """sha256 of the config bytes the run was loaded from."""

    def require_data(self) -> DataConfig:
        if self.data is None:
            raise ConfigError("Missing required section.", path="data")
        return self.data

    def with_overrides(
        self, seed: int | None = None, output_dir: str | None = None
    ) -> RunConfig:
        changes: dict[str, Any] = {}
        if seed is not None:
            if seed < 0:
                raise ConfigError("Value must be at least 0.", path="seed")
            changes["seed"] = seed
        if output_dir is not None:
            changes["output_dir"] = output_dir
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data.pop("digest")
        return _plain(data)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _check_oracle_rows(rows: list[list[Any]], path: str) -> tuple[tuple[float, ...], ...]:
    width = len(rows[0])
    if width < 2:
        raise ConfigError("Each row needs features and a label.", path=path)
    out = []
    for idx, row in enumerate(rows):
        if len(row) != width:
            raise ConfigError(f"Row [{idx}] has {len(row)} entries, expected {width}.", path=path)
        if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in row):
            raise ConfigError(f"Row [{idx}] must hold numbers.", path=path)
        label = row[-1]
        if not isinstance(label, int) or label not in (0, 1):
            raise ConfigError(f"Row [{idx}] label must be 0 or 1.", path=path)
        out.append(tuple(float(x) for x in row[:-1]) + (label,))
    return tuple(out)


def build_config(raw: Any, digest: str = "") -> RunConfig:
    """Validate a parsed YAML mapping and build a RunConfig."""

    values = validate_mapping(raw, RUN_SCHEMA)

    data = values["data"]
    if data is not None:
        for key in ("n_per_class", "dev_per_class"):
            if isinstance(data[key], list) and len(data[key]) != data["c"]:
                raise ConfigError(f"List must hold c={data['c']} counts.", path=f"data.{key}")

    dds = dict(values["dds"])
    taylor = TaylorConfig(**dds.pop("taylor"))
    if taylor.enabled and dds["reward"] == "cosine":
        raise ConfigError(
            "The Taylor reward approximates dot products only; set dds.reward to 'dot'.",
            path="dds.taylor.enabled",
        )

    group = values["group_dds"]
    if data is not None and data["kind"] == "group_shift":
        if group["n"] is not None and group["n"] != data["n_groups"]:
            raise ConfigError(
                f"Must equal data.n_groups={data['n_groups']}.", path="group_dds.n"
            )
        if data["dev_group"] >= data["n_groups"]:
            raise ConfigError(
                f"Must be below data.n_groups={data['n_groups']}.", path="data.dev_group"
            )
    if group["prior_logits"] is not None:
        expected = group["n"]
        if expected is None and data is not None and data["kind"] == "group_shift":
            expected = data["n_groups"]
        if expected is not None and len(group["prior_logits"]) != expected:
            raise ConfigError(
                f"List must hold {expected} logits.", path="group_dds.prior_logits"
            )

    gradcheck = dict(values["gradcheck"])
    gradcheck["optimizers"] = tuple(gradcheck["optimizers"])
    gradcheck["taylor_eps"] = tuple(gradcheck["taylor_eps"])
    if list(gradcheck["taylor_eps"]) != sorted(gradcheck["taylor_eps"], reverse=True):
        raise ConfigError("List must be strictly descending.", path="gradcheck.taylor_eps")
    if len(set(gradcheck["taylor_eps"])) != len(gradcheck["taylor_eps"]):
        raise ConfigError("List must be strictly descending.", path="gradcheck.taylor_eps")

    oracle = dict(values["oracle"])
    oracle["train"] = _check_oracle_rows(oracle["train"], "oracle.train")
    oracle["dev"] = _check_oracle_rows(oracle["dev"], "oracle.dev")
    if len(oracle["train"]) > 3:
        raise ConfigError("At most 3 training examples.", path="oracle.train")
    if len(oracle["dev"][0]) != len(oracle["train"][0]):
        raise ConfigError("Dev rows must match the training row width.", path="oracle.dev")

    scorer = dict(values["scorer"])
    scorer_opt = OptimizerConfig(**scorer.pop("optimizer"))

    return RunConfig(
        engine=values["engine"],
        seed=values["seed"],
        output_dir=values["output_dir"],
        log_every=values["log_every"],
        data=DataConfig(**data) if data is not None else None,
        model=ModelConfig(**values["model"]),
        optimizer=OptimizerConfig(**values["optimizer"]),
        scorer=ScorerConfig(optimizer=scorer_opt, **scorer),
        dds=DdsConfig(taylor=taylor, **dds),
        group_dds=GroupDdsConfig(**group),
        gradcheck=GradcheckConfig(**gradcheck),
        oracle=OracleConfig(**oracle),
        schema_version=values["schema_version"],
        digest=digest,
    )


def resolve_config_path(path: str) -> str:
    """Accept ``package:dir/file.yaml`` resource names besides plain paths."""

    module, sep, _ = path.partition(":")
    if sep and "://" not in path and module.isidentifier() and len(module) > 1:
        return str(resources_to_paths([path])[0])
    return path


def load_config_bytes(blob: bytes) -> RunConfig:
    try:
        raw = yaml.safe_load(blob)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Invalid YAML: {exc}", path="<root>") from exc
    return build_config(raw, digest=hashlib.sha256(blob).hexdigest())


def read_config_bytes(path: str) -> bytes:
    path = resolve_config_path(path)
    try:
        with fsspec.open(path, "rb") as f:
            return f.read()
    except (FileNotFoundError, IsADirectoryError) as exc:
        raise ConfigError(f"cannot read config file: {exc}", path=path) from exc


def load_config(path: str) -> RunConfig:
    return load_config_bytes(read_config_bytes(path))


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.as_dict(), sort_keys=False)


# EOF
