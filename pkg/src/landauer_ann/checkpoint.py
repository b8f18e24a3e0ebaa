"""JSON checkpoint of a trained network and its per-epoch snapshots.

Layout (format version 1)::

    {
      "format": "landauer-ann-checkpoint",
      "format_version": 1,
      "seed": <int>,
      "topology": {"input_size": 9, "hidden_size": 12, "output_size": 1},
      "net": <params>,                      # early-stopped network (best val MSE)
      "history": {
        "stopped_epoch": <int>, "best_epoch": <int>, "early_stopped": <bool>,
        "epochs": [{"epoch": 1, "train_mse": .., "val_mse": .., "net": <params>}, ...]
      },
      "config": {...}, "train_ids": [...], "val_ids": [...]
    }

``<params>`` maps each of ``w1, b1, w2, b2`` to ``{"shape": [...], "data": [...]}``
with ``data`` in row-major order. Floats are written with shortest
round-trip repr, so loading reproduces the arrays bit for bit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .nn import PARAM_NAMES, EpochRecord, Mlp, NetworkTopology, TrainingHistory

FORMAT = "landauer-ann-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    net: Mlp
    history: TrainingHistory
    seed: int
    config: dict[str, Any] = field(default_factory=dict)
    train_ids: list[str] = field(default_factory=list)
    val_ids: list[str] = field(default_factory=list)


def _params_to_json(net: Mlp) -> dict:
    return {
        name: {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}
        for name, arr in net.params().items()
    }


def _params_from_json(d: dict) -> Mlp:
    try:
        arrays = [np.array(d[n]["data"], dtype=np.float64).reshape(d[n]["shape"]) for n in PARAM_NAMES]
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"malformed parameter block: {exc}") from exc
    return Mlp(*arrays)


def checkpoint_to_json(ckpt: Checkpoint) -> str:
    doc = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "seed": int(ckpt.seed),
        "topology": vars(ckpt.net.topology),
        "net": _params_to_json(ckpt.net),
        "history": {
            "stopped_epoch": ckpt.history.stopped_epoch,
            "best_epoch": ckpt.history.best_epoch,
            "early_stopped": ckpt.history.early_stopped,
            "epochs": [
                {"epoch": r.epoch, "train_mse": r.train_mse, "val_mse": r.val_mse, "net": _params_to_json(r.snapshot)}
                for r in ckpt.history.records
            ],
        },
        "config": ckpt.config,
        "train_ids": list(ckpt.train_ids),
        "val_ids": list(ckpt.val_ids),
    }
    return json.dumps(doc, sort_keys=True) + "\n"


def checkpoint_from_json(text: str) -> Checkpoint:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from exc
    if doc.get("format") != FORMAT or doc.get("format_version") != FORMAT_VERSION:
        raise CheckpointError("not a version-1 landauer-ann checkpoint")
    net = _params_from_json(doc["net"])
    if vars(net.topology) != doc["topology"]:
        raise CheckpointError(f"topology {doc['topology']} does not match weights {vars(net.topology)}")
    h = doc["history"]
    history = TrainingHistory(
        records=[EpochRecord(e["epoch"], e["train_mse"], e["val_mse"], _params_from_json(e["net"])) for e in h["epochs"]],
        stopped_epoch=h["stopped_epoch"],
        best_epoch=h["best_epoch"],
        early_stopped=h["early_stopped"],
    )
    return Checkpoint(net, history, doc["seed"], doc.get("config", {}), doc.get("train_ids", []), doc.get("val_ids", []))


def save_checkpoint(ckpt: Checkpoint, path: str | os.PathLike) -> None:
    atomic_write(path, checkpoint_to_json(ckpt))


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    return checkpoint_from_json(Path(path).read_text())


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
