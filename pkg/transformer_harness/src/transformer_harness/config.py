"""Fine-tuning configuration.

Defaults follow the published recipe: learning rate 3e-5, batch size 32,
10 epochs for full fine-tuning; low-rank adapters use rank 8 with alpha 16
on the self-attention projection matrices. The base checkpoint is an
identifier (hub id or local ``save_pretrained`` directory); the reference
model is byte-level, so inputs need no tokenizer beyond UTF-8.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import DataError, HarnessError

MODES = ("full", "lora")
TARGET_PROJECTIONS = ("q", "k", "v", "o")
REFERENCE_MODEL = "google/byt5-small"


@dataclass(frozen=True)
class FinetuneConfig:
    mode: str = "full"
    model_id: str = REFERENCE_MODEL
    learning_rate: float = 3e-5
    batch_size: int = 32
    epochs: int = 10
    lora_rank: int = 8
    lora_alpha: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise HarnessError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.model_id:
            raise HarnessError("model_id must name a checkpoint")
        if self.learning_rate <= 0:
            raise HarnessError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("batch_size", "epochs", "lora_rank", "lora_alpha"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise HarnessError(f"{name} must be a positive integer, got {value!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "FinetuneConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise HarnessError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)


def load_config(path: str | Path) -> FinetuneConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise HarnessError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config is not valid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DataError("config must be a JSON object")
    return FinetuneConfig.from_dict(doc)
