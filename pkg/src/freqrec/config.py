"""Model/training configuration and ablation switches."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple

from .errors import ConfigError

FUSION_MODES = ("parallel", "serial")
DISTANCE_KINDS = ("l1", "l2", "mix")
ACTIVATIONS = ("identity", "leaky_relu", "relu", "gelu")


@dataclass
class ModelConfig:
    """All architecture and training hyper-parameters.

    Defaults follow the reported optima for this model family:
    embedding width 64, window 50, batch 64, gate weights
    alpha = gamma = 0.7, loss blend beta = 0.6, Adam at 5e-4 with
    10-round early stopping.
    """

    dim: int = 64
    max_len: int = 50
    layers: int = 1
    heads: int = 2
    ffn_dim: int = 0  # 0 means 4 * dim
    dropout: float = 0.2
    alpha: float = 0.7
    gamma: float = 0.7
    beta: float = 0.6
    fusion: str = "parallel"
    distance: str = "mix"
    activation: str = "leaky_relu"
    leaky_slope: float = 0.2
    detach_target: bool = False
    batch_size: int = 64
    lr: float = 5e-4
    max_epochs: int = 100
    patience: int = 10
    seed: int = 42
    eval_k: Tuple[int, ...] = (10, 20)

    def resolved_ffn_dim(self) -> int:
        return self.ffn_dim if self.ffn_dim > 0 else 4 * self.dim

    def validate(self) -> "ModelConfig":
        if self.dim < 1 or self.max_len < 1 or self.layers < 1:
            raise ConfigError("dim, max_len and layers must be positive")
        if self.heads < 1 or self.dim % self.heads != 0:
            raise ConfigError(f"heads ({self.heads}) must divide dim ({self.dim})")
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.fusion not in FUSION_MODES:
            raise ConfigError(f"fusion must be one of {FUSION_MODES}, got {self.fusion!r}")
        if self.distance not in DISTANCE_KINDS:
            raise ConfigError(f"distance must be one of {DISTANCE_KINDS}, got {self.distance!r}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        return self

    def replace(self, **overrides) -> "ModelConfig":
        return dataclasses.replace(self, **overrides).validate()


@dataclass
class AblationSpec:
    """Branch/objective switches mirroring the model's component study."""

    disable_sa: bool = False
    disable_gsa: bool = False
    disable_lsr: bool = False
    disable_freq_loss: bool = False
    disable_ce_loss: bool = False

    def validate(self) -> "AblationSpec":
        if self.disable_freq_loss and self.disable_ce_loss:
            raise ConfigError("cannot disable both loss terms; some objective must remain")
        return self

    @classmethod
    def from_names(cls, names) -> "AblationSpec":
        """Build from short switch names: sa, gsa, lsr, lf, ce."""
        mapping = {
            "sa": "disable_sa",
            "gsa": "disable_gsa",
            "lsr": "disable_lsr",
            "lf": "disable_freq_loss",
            "ce": "disable_ce_loss",
        }
        spec = cls()
        for name in names:
            key = name.strip().lower()
            if key not in mapping:
                raise ConfigError(f"unknown ablation switch {name!r}; choose from {sorted(mapping)}")
            setattr(spec, mapping[key], True)
        return spec.validate()


def _coerce(value: str, target_type):
    if target_type is bool:
        lowered = value.strip().lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean from {value!r}")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    if target_type is tuple:
        return tuple(int(v) for v in value.replace(",", " ").split())
    return value


def load_config_file(path: str | Path) -> Dict[str, object]:
    """Parse a `key = value` config file into ModelConfig field values."""
    defaults = ModelConfig()
    types = {f.name: type(getattr(defaults, f.name)) for f in dataclasses.fields(ModelConfig)}
    out: Dict[str, object] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _coerce(value, types[key])
    return out


def build_config(file_path=None, overrides: Dict[str, object] | None = None) -> ModelConfig:
    """Defaults, then config file values, then explicit overrides."""
    values: Dict[str, object] = {}
    if file_path is not None:
        values.update(load_config_file(file_path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ModelConfig(**values).validate()
