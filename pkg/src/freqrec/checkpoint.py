"""Self-describing checkpoints: config plus every parameter tensor."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .config import AblationSpec, ModelConfig
from .errors import ShapeError
from .model import FreqRec


def save_checkpoint(model: FreqRec, path: str | Path) -> None:
    """Write an .npz archive holding the config, item count, and weights."""
    meta = {
        "config": dataclasses.asdict(model.config),
        "ablation": dataclasses.asdict(model.ablation),
        "item_count": model.item_count,
    }
    arrays = {f"param:{name}": p.data for name, p in model.parameters().items()}
    np.savez(Path(path), meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path: str | Path) -> FreqRec:
    """Rebuild a model from disk, validating every parameter shape."""
    with np.load(Path(path), allow_pickle=False) as archive:
        meta = json.loads(str(archive["meta"]))
        config_values = dict(meta["config"])
        config_values["eval_k"] = tuple(config_values.get("eval_k", (10, 20)))
        config = ModelConfig(**config_values).validate()
        ablation = AblationSpec(**meta["ablation"]).validate()
        model = FreqRec(config, int(meta["item_count"]), ablation=ablation)
        for name, param in model.parameters().items():
            key = f"param:{name}"
            if key not in archive:
                raise ShapeError(f"checkpoint {path} is missing parameter {name!r}")
            stored = archive[key]
            if stored.shape != param.data.shape:
                raise ShapeError(
                    f"checkpoint parameter {name!r} has shape {stored.shape}, "
                    f"model expects {param.data.shape}"
                )
            param.data[...] = stored
    return model
