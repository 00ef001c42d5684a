"""Fine-tuning loop and model artifacts.

An artifact is a directory: ``harness.json`` records the run, full mode
saves the whole model under ``model/``, lora mode saves only the adapter
tensors (``adapters.pt``) plus the base checkpoint reference. In lora mode
the trainable fraction is computed after injection and the run aborts if it
reaches 1% of all parameters: the point of the adapter regime is updating
well under a percent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import torch
from torch import nn

from . import __version__
from .codec import PAD_ID, encode
from .config import FinetuneConfig
from .data import Pair
from .errors import CheckpointError, HarnessError
from .lora import adapter_state, inject_lora, parameter_budget

LABEL_IGNORE = -100
MAX_LORA_FRACTION = 0.01


def load_base_model(model_id: str):
    from transformers import T5ForConditionalGeneration

    try:
        return T5ForConditionalGeneration.from_pretrained(model_id)
    except (OSError, ValueError) as exc:
        raise CheckpointError(
            f"pretrained checkpoint {model_id!r} is not available: {exc}. "
            "Pass a local save_pretrained directory or a reachable model id."
        ) from exc


def _pad_batch(rows: Sequence[list[int]], fill: int) -> torch.Tensor:
    width = max(len(r) for r in rows)
    out = torch.full((len(rows), width), fill, dtype=torch.long)
    for i, r in enumerate(rows):
        out[i, : len(r)] = torch.tensor(r, dtype=torch.long)
    return out


def make_batch(pairs: Sequence[Pair]) -> dict[str, torch.Tensor]:
    sources = [encode(p.source) for p in pairs]
    targets = [encode(p.target) for p in pairs]
    input_ids = _pad_batch(sources, PAD_ID)
    labels = _pad_batch(targets, LABEL_IGNORE)
    return {
        "input_ids": input_ids,
        "attention_mask": (input_ids != PAD_ID).long(),
        "labels": labels,
    }


@dataclass(frozen=True)
class FinetuneResult:
    artifact_dir: str
    losses: tuple[float, ...]  # one entry per optimizer step
    trainable_fraction: float

    @property
    def initial_loss(self) -> float:
        return self.losses[0]

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def finetune(
    config: FinetuneConfig,
    pairs: Sequence[Pair],
    out_dir: str | Path,
    log_stream: IO[str] | None = None,
) -> FinetuneResult:
    if not pairs:
        raise HarnessError("no training pairs")
    torch.manual_seed(config.seed)
    model = load_base_model(config.model_id)

    if config.mode == "lora":
        inject_lora(model, config.lora_rank, config.lora_alpha)
        budget = parameter_budget(model)
        if budget.fraction >= MAX_LORA_FRACTION:
            raise HarnessError(
                f"lora trainable fraction {budget.fraction:.4f} is not under "
                f"{MAX_LORA_FRACTION:.0%}; increase the base model or lower the rank"
            )
    else:
        budget = parameter_budget(model)
        if budget.trainable != budget.total:
            raise HarnessError("full mode expects every parameter trainable")

    trainable = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(trainable, lr=config.learning_rate)
    shuffler = torch.Generator().manual_seed(config.seed)

    model.train()
    losses: list[float] = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = torch.randperm(len(pairs), generator=shuffler).tolist()
        for lo in range(0, len(order), config.batch_size):
            chunk = [pairs[i] for i in order[lo : lo + config.batch_size]]
            batch = make_batch(chunk)
            out = model(**batch)
            optimizer.zero_grad()
            out.loss.backward()
            optimizer.step()
            step += 1
            loss = float(out.loss.detach())
            losses.append(loss)
            if log_stream is not None:
                log_stream.write(
                    json.dumps({"epoch": epoch, "step": step, "loss": loss}) + "\n"
                )

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    _save_artifact(model, config, budget.fraction, out_path)
    return FinetuneResult(str(out_path), tuple(losses), budget.fraction)


def _save_artifact(model: nn.Module, config: FinetuneConfig, fraction: float, out: Path) -> None:
    doc = {
        "harnessVersion": __version__,
        "trainableFraction": fraction,
        **config.to_dict(),
    }
    (out / "harness.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if config.mode == "full":
        model.save_pretrained(out / "model")
    else:
        torch.save(adapter_state(model), out / "adapters.pt")
