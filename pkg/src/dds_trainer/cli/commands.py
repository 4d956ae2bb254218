# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

import time
from typing import Any

import click
import numpy as np

from dds_trainer.cli.debugging import META_IPDB_FLAG, DDSManagerGroup
from dds_trainer.config.app import logger
from dds_trainer.config.run import RunConfig, dump_config, load_config
from dds_trainer.lib.exceptions import NumericalError
from dds_trainer.lib.utils import join_path, provenance_string, write_json

config_option = click.option(
    "--config",
    "config_path",
    required=True,
    help="Run config YAML file, or package resource such as dds_trainer:fixtures/gradcheck.yaml",
)
out_option = click.option(
    "--out", "out_dir", default=None, help="Output directory, overrides output_dir."
)
seed_option = click.option(
    "--seed", type=int, default=None, help="Top-level seed, overrides seed."
)


def _load(config_path: str, seed: int | None = None, out_dir: str | None = None) -> RunConfig:
    cfg = load_config(config_path).with_overrides(seed=seed, output_dir=out_dir)
    logger.info(f"loaded {config_path}: engine={cfg.engine} seed={cfg.seed}")
    return cfg


@click.group(
    name="ddsmgr",
    invoke_without_command=False,
    help="CLI manager for dds-trainer",
    cls=DDSManagerGroup,
)
@click.option(
    "--ipdb/--no-ipdb",
    "use_ipdb",
    default=False,
    show_default=True,
    help="Drop into ipdb if a command raises an unhandled exception.",
)
def ddsmgr(use_ipdb: bool) -> None:
    """Train and verify data selection models."""

    from dds_trainer.engine import register_default_engines

    register_default_engines()

    ctx = click.get_current_context()
    ctx.meta[META_IPDB_FLAG] = use_ipdb


@ddsmgr.command(name="train", help="run the configured engine and write metrics and checkpoints")
@config_option
@out_option
@seed_option
def dds_train(config_path: str, out_dir: str | None, seed: int | None) -> None:
    from dds_trainer.data.loader import build_datasets
    from dds_trainer.engine import get_engine
    from dds_trainer.lib.checkpoint import save_params
    from dds_trainer.lib.utils import MetricsWriter

    cfg = _load(config_path, seed, out_dir)
    train, dev = build_datasets(cfg.require_data(), cfg.seed)
    engine = get_engine(cfg.engine)

    started = time.perf_counter()
    with MetricsWriter(join_path(cfg.output_dir, "metrics.jsonl")) as metrics:
        result = engine(cfg, train, dev, metrics)
    elapsed = time.perf_counter() - started

    save_params(join_path(cfg.output_dir, "params.bin"), result.theta)
    scorer_params = getattr(result, "psi", getattr(result, "omega", None))
    if scorer_params is not None:
        save_params(join_path(cfg.output_dir, "scorer.bin"), scorer_params)

    summary: dict[str, Any] = {
        "engine": cfg.engine,
        "seed": cfg.seed,
        "provenance": provenance_string(cfg.digest),
        "wall_clock_seconds": elapsed,
        "steps": getattr(result, "steps", getattr(result, "rounds", 0)),
        "final_dev_acc": result.dev_acc,
        "final_dev_loss": result.dev_loss,
    }
    if cfg.engine == "dds":
        summary["weights"] = result.weight_report.as_dict()
        if result.phase_dev_acc:
            summary["phase_dev_acc"] = {str(k): v for k, v in result.phase_dev_acc.items()}
    elif cfg.engine == "group_dds":
        summary["initial_group_probs"] = result.initial_probs
        summary["final_group_probs"] = result.final_probs
    write_json(join_path(cfg.output_dir, "summary.json"), summary)

    click.echo(
        f"{cfg.engine}: dev_acc={result.dev_acc:.4f} dev_loss={result.dev_loss:.4f} "
        f"-> {cfg.output_dir}"
    )


@ddsmgr.command(name="gradcheck", help="check scorer hypergradients against finite differences")
@config_option
@out_option
@seed_option
def dds_gradcheck(config_path: str, out_dir: str | None, seed: int | None) -> None:
    from dds_trainer.verify.gradcheck import run_gradcheck

    cfg = _load(config_path, seed, out_dir)
    result = run_gradcheck(cfg.gradcheck, cfg.seed)
    write_json(join_path(cfg.output_dir, "report.json"), result.as_dict())

    for label, value in sorted(result.max_rel_error.items()):
        click.echo(f"{label:<20} max rel error {value:.3e}")
    if result.taylor is not None:
        click.echo(f"taylor slope {result.taylor.slope}")
    click.echo(f"pass={str(result.passed).lower()}")
    if not result.passed:
        raise NumericalError("hypergradient check failed, see report.json")


@ddsmgr.command(name="oracle", help="brute-force the tiny bi-level problem")
@config_option
@out_option
@seed_option
def dds_oracle(config_path: str, out_dir: str | None, seed: int | None) -> None:
    from dds_trainer.verify.oracle import run_oracle

    cfg = _load(config_path, seed, out_dir)
    result = run_oracle(cfg.oracle, cfg.seed)
    write_json(join_path(cfg.output_dir, "report.json"), result.as_dict())

    click.echo(f"w*={result.best_weights} dev_loss={result.best_dev_loss:.6f}")
    if result.dds is not None:
        click.echo(f"dds agrees with w*: {str(result.dds['agree']).lower()}")


@ddsmgr.command(name="gen-data", help="write the configured train and dev sets as CSV")
@config_option
@out_option
@seed_option
def dds_gen_data(config_path: str, out_dir: str | None, seed: int | None) -> None:
    from dds_trainer.data.io import save_csv
    from dds_trainer.data.loader import build_datasets

    cfg = _load(config_path, seed, out_dir)
    train, dev = build_datasets(cfg.require_data(), cfg.seed)
    for name, ds in (("train", train), ("dev", dev)):
        path = join_path(cfg.output_dir, f"{name}.csv")
        save_csv(ds, path)
        click.echo(f"{name}: {len(ds)} examples -> {path}")


@ddsmgr.command(name="show-config", help="print the validated config with all defaults")
@config_option
@seed_option
def dds_show_config(config_path: str, seed: int | None) -> None:
    cfg = _load(config_path, seed)
    click.echo(dump_config(cfg), nl=False)


@ddsmgr.command(name="inspect-checkpoint", help="show header and statistics of a params.bin file")
@click.argument("path")
def dds_inspect_checkpoint(path: str) -> None:
    from dds_trainer.lib.checkpoint import load_params, read_header

    header = read_header(path)
    params = load_params(path)
    for key, value in header.items():
        click.echo(f"{key + ':':<8} {value}")
    if params.size:
        click.echo(f"min:     {float(np.min(params)):.6g}")
        click.echo(f"max:     {float(np.max(params)):.6g}")
        click.echo(f"l2 norm: {float(np.linalg.norm(params)):.6g}")


def main() -> None:
    """
    CLI entry point for ddsmgr standalone command
    """

    ddsmgr()


# EOF
