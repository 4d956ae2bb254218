# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

"""CSV dataset files and their JSON sidecar.

A dataset file has the header ``f0,...,f{d-1},label,group`` with an
optional trailing ``instance`` column for group-aligned data. Floats are
written with ``repr`` so a write/read cycle is exact. The sidecar
``<path>.json`` keeps what the CSV cannot: class count, group count,
provenance and the corruption mask. Without a sidecar, ``c`` and ``n`` are
inferred from the largest label and group id.
"""

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import csv
import io
from typing import Any

import fsspec
import numpy as np
from litestar.serialization import decode_json, encode_json

from dds_trainer.config.app import get_logger
from dds_trainer.data.dataset import Dataset
from dds_trainer.lib.exceptions import DatasetError

logger = get_logger(__name__)

SIDECAR_SUFFIX = ".json"


def sidecar_path(path: str) -> str:
    return path + SIDECAR_SUFFIX


def _instance_column(ds: Dataset) -> np.ndarray | None:
    if ds.instances is None:
        return None
    column = np.full(len(ds), -1, dtype=np.int64)
    rows, _ = np.nonzero(ds.instances >= 0)
    column[ds.instances[ds.instances >= 0]] = rows
    return column


def save_csv(ds: Dataset, path: str, sidecar: bool = True) -> None:
    instance = _instance_column(ds)
    header = [f"f{k}" for k in range(ds.d)] + ["label", "group"]
    if instance is not None:
        header.append("instance")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i in range(len(ds)):
        row = [repr(float(x)) for x in ds.features[i]]
        row += [str(int(ds.labels[i])), str(int(ds.groups[i]))]
        if instance is not None:
            row.append(str(int(instance[i])))
        writer.writerow(row)

    with fsspec.open(path, "w", auto_mkdir=True) as f:
        f.write(buf.getvalue())

    if sidecar:
        meta = {
            "d": ds.d,
            "c": ds.c,
            "n": ds.n,
            "size": len(ds),
            "provenance": ds.provenance,
            "corrupted": [int(i) for i in np.flatnonzero(ds.corrupted)],
        }
        if ds.instances is not None:
            meta["n_instances"] = int(ds.instances.shape[0])
        with fsspec.open(sidecar_path(path), "wb", auto_mkdir=True) as f:
            f.write(encode_json(meta))
    logger.info(f"wrote {len(ds)} examples to {path}")


def _read_sidecar(path: str) -> dict[str, Any] | None:
    fs, _, paths = fsspec.get_fs_token_paths(sidecar_path(path))
    if not fs.exists(paths[0]):
        return None
    with fsspec.open(sidecar_path(path), "rb") as f:
        try:
            meta = decode_json(f.read())
        except Exception as exc:  # noqa: BLE001
            raise DatasetError(f"unreadable sidecar: {exc}", path=sidecar_path(path))
    if not isinstance(meta, dict):
        raise DatasetError("sidecar must hold a JSON object", path=sidecar_path(path))
    return meta


def _parse_header(header: list[str], path: str) -> tuple[int, bool]:
    names = [h.strip() for h in header]
    has_instance = bool(names) and names[-1] == "instance"
    core = names[:-1] if has_instance else names
    if len(core) < 3 or core[-2:] != ["label", "group"]:
        raise DatasetError("header must end with 'label,group'", path=path, line=1)
    d = len(core) - 2
    if core[:d] != [f"f{k}" for k in range(d)]:
        raise DatasetError("feature columns must be named f0..f{d-1}", path=path, line=1)
    return d, has_instance


def load_csv(path: str) -> Dataset:
    with fsspec.open(path, "r") as f:
        text = f.read()

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("file is empty", path=path, line=1) from None
    d, has_instance = _parse_header(header, path)
    width = d + 2 + int(has_instance)

    features: list[list[float]] = []
    labels: list[int] = []
    groups: list[int] = []
    instance: list[int] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != width:
            raise DatasetError(
                f"expected {width} fields, got {len(row)}", path=path, line=line
            )
        try:
            values = [float(cell) for cell in row[:d]]
            label = int(row[d])
            group = int(row[d + 1])
            inst = int(row[d + 2]) if has_instance else -1
        except ValueError as exc:
            raise DatasetError(f"cannot parse row: {exc}", path=path, line=line) from None
        if not all(np.isfinite(values)):
            raise DatasetError("non-finite feature value", path=path, line=line)
        if label < 0 or group < 0:
            raise DatasetError("label and group must be >= 0", path=path, line=line)
        features.append(values)
        labels.append(label)
        groups.append(group)
        instance.append(inst)

    if not features:
        raise DatasetError("file holds no examples", path=path)

    meta = _read_sidecar(path) or {}
    c = int(meta.get("c", max(max(labels) + 1, 2)))
    n = int(meta.get("n", max(groups) + 1))
    corrupted = np.zeros(len(features), dtype=bool)
    for i in meta.get("corrupted", []):
        if not 0 <= int(i) < len(features):
            raise DatasetError("sidecar corruption index out of range", path=path)
        corrupted[int(i)] = True

    instances = None
    if has_instance:
        n_instances = int(meta.get("n_instances", max(instance) + 1))
        instances = np.full((n_instances, n), -1, dtype=np.int64)
        for row_id, (inst, group) in enumerate(zip(instance, groups)):
            if inst < 0:
                continue
            if inst >= n_instances or group >= n or instances[inst, group] != -1:
                raise DatasetError(
                    f"bad instance alignment for instance {inst}, group {group}",
                    path=path,
                    line=row_id + 2,
                )
            instances[inst, group] = row_id

    return Dataset(
        features=np.asarray(features, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        groups=np.asarray(groups, dtype=np.int64),
        corrupted=corrupted,
        c=c,
        n=n,
        provenance=meta.get("provenance", {"source": path}),
        instances=instances,
    )


# EOF
