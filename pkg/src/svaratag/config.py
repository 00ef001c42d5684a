"""Toolkit configuration: one JSON document, hashed for provenance.

Example document (all keys optional; defaults fill the rest):

    {
      "accentInventory": ["0951", "0952", "1CD0-1CFF"],
      "split": {"ratios": [0.85, 0.10, 0.05], "seed": 7},
      "train": {"learning_rate": 1e-3, "epochs": 20, "seed": 7},
      "window": 2,
      "paths": {"corpus": "corpus.jsonl"}
    }
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ContractError
from .tagger.train import TrainConfig
from .text import DEFAULT_INVENTORY, parse_inventory

DEFAULT_RATIOS = (0.85, 0.10, 0.05)


@dataclass(frozen=True)
class ToolConfig:
    inventory: frozenset[int] = DEFAULT_INVENTORY
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    window: int = 2
    paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ContractError(f"need three non-negative ratios, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ContractError(f"split ratios must sum to 1, got {sum(self.ratios)}")
        if self.window < 1:
            raise ContractError(f"misplacement window must be >= 1, got {self.window}")
        if not self.inventory:
            raise ContractError("accent inventory is empty")

    def to_json_dict(self) -> dict:
        return {
            "accentInventory": [f"{cp:04X}" for cp in sorted(self.inventory)],
            "split": {"ratios": list(self.ratios), "seed": self.seed},
            "train": self.train.to_dict(),
            "window": self.window,
            "paths": dict(sorted(self.paths.items())),
        }

    @property
    def sha256(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True, ensure_ascii=True)
        return hashlib.sha256(blob.encode("ascii")).hexdigest()


def config_from_dict(doc: dict) -> ToolConfig:
    known = {"accentInventory", "split", "train", "window", "paths"}
    unknown = set(doc) - known
    if unknown:
        raise ContractError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict = {}
    if "accentInventory" in doc:
        kwargs["inventory"] = parse_inventory(doc["accentInventory"])
    split = doc.get("split", {})
    if not isinstance(split, dict):
        raise ContractError("`split` must be an object")
    if "ratios" in split:
        kwargs["ratios"] = tuple(float(r) for r in split["ratios"])
    if "seed" in split:
        kwargs["seed"] = int(split["seed"])
    if "train" in doc:
        kwargs["train"] = TrainConfig.from_dict(doc["train"])
    if "window" in doc:
        kwargs["window"] = int(doc["window"])
    if "paths" in doc:
        paths = doc["paths"]
        if not isinstance(paths, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in paths.items()
        ):
            raise ContractError("`paths` must map names to path strings")
        kwargs["paths"] = dict(paths)
    return ToolConfig(**kwargs)


def load_config(path: str | Path) -> ToolConfig:
    """Parse a config file; missing keys take defaults."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ContractError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ContractError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ContractError(f"config {path} must be a JSON object")
    return config_from_dict(doc)
