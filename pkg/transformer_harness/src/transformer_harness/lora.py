"""Low-rank adapters on self-attention projections, implemented directly.

Each targeted ``nn.Linear`` is wrapped so its output becomes
``W x + (alpha / r) * B (A x)`` with ``A`` of shape (r, in) and ``B`` of
shape (out, r). ``B`` starts at zero, so the wrapped model computes exactly
the base model's function until training moves the adapters. Injection
freezes every base parameter first; afterwards only adapter weights are
trainable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .errors import HarnessError

ATTENTION_PROJECTIONS = ("q", "k", "v", "o")


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, rank: int, alpha: int):
        super().__init__()
        if rank < 1:
            raise HarnessError(f"rank must be >= 1, got {rank}")
        self.base = base
        self.rank = rank
        self.scaling = alpha / rank
        device, dtype = base.weight.device, base.weight.dtype
        self.lora_A = nn.Parameter(torch.empty(rank, base.in_features, device=device, dtype=dtype))
        self.lora_B = nn.Parameter(torch.zeros(base.out_features, rank, device=device, dtype=dtype))
        if device.type != "meta":
            nn.init.kaiming_uniform_(self.lora_A, a=math.sqrt(5))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.base(x) + (x @ self.lora_A.T @ self.lora_B.T) * self.scaling


def _attention_modules(model: nn.Module):
    for name, module in model.named_modules():
        if not type(module).__name__.endswith("Attention"):
            continue
        children = {p: getattr(module, p, None) for p in ATTENTION_PROJECTIONS}
        if all(isinstance(c, nn.Linear) for c in children.values()):
            yield name, module


def inject_lora(model: nn.Module, rank: int, alpha: int) -> int:
    """Freeze the model and wrap every q/k/v/o projection; returns the count."""
    for p in model.parameters():
        p.requires_grad_(False)
    wrapped = 0
    for _, attention in _attention_modules(model):
        for proj in ATTENTION_PROJECTIONS:
            setattr(attention, proj, LoraLinear(getattr(attention, proj), rank, alpha))
            wrapped += 1
    if wrapped == 0:
        raise HarnessError("model has no q/k/v/o attention projections to adapt")
    return wrapped


@dataclass(frozen=True)
class ParameterBudget:
    trainable: int
    total: int

    @property
    def fraction(self) -> float:
        return self.trainable / self.total if self.total else 0.0


def parameter_budget(model: nn.Module) -> ParameterBudget:
    total = trainable = 0
    for p in model.parameters():
        total += p.numel()
        if p.requires_grad:
            trainable += p.numel()
    return ParameterBudget(trainable, total)


def adapter_state(model: nn.Module) -> dict[str, torch.Tensor]:
    return {
        name: tensor
        for name, tensor in model.state_dict().items()
        if "lora_A" in name or "lora_B" in name
    }


def load_adapter_state(model: nn.Module, state: dict[str, torch.Tensor]) -> None:
    missing, unexpected = model.load_state_dict(state, strict=False)
    unexpected = list(unexpected)
    still_missing = [n for n in missing if "lora_A" in n or "lora_B" in n]
    if unexpected or still_missing:
        raise HarnessError(
            f"adapter state mismatch: unexpected {unexpected[:3]}, missing {still_missing[:3]}"
        )
