"""Adam optimizer with global-norm gradient clipping.

Operates on named tensor dicts (the same keying as ``TaggerParams.tensors``)
so the whole model updates in one call. State tensors are float64 to match
the training dtype.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError


@dataclass
class AdamState:
    """First/second moment accumulators plus the step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @staticmethod
    def for_tensors(tensors: dict[str, np.ndarray]) -> "AdamState":
        m = {name: np.zeros_like(t) for name, t in tensors.items()}
        v = {name: np.zeros_like(t) for name, t in tensors.items()}
        return AdamState(m=m, v=v, step=0)


def global_norm(grads: dict[str, np.ndarray]) -> float:
    """L2 norm over the concatenation of every gradient tensor."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(np.square(g)))
    return float(np.sqrt(total))


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients in place so their joint L2 norm is <= max_norm.

    Returns the pre-clip norm. A non-finite norm raises TrainingDiverged
    upstream; here it is reported as-is so the caller can decide.
    """
    if max_norm <= 0:
        raise ContractError(f"max_norm must be positive, got {max_norm}")
    norm = global_norm(grads)
    if np.isfinite(norm) and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def adam_step(
    tensors: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One Adam update, in place, with bias correction.

    Every tensor must have a matching gradient; a missing or extra name is
    a wiring bug and fails loudly.
    """
    if set(tensors) != set(grads):
        missing = set(tensors) ^ set(grads)
        raise ContractError(f"tensor/gradient name mismatch: {sorted(missing)}")
    if not state.m:
        fresh = AdamState.for_tensors(tensors)
        state.m, state.v = fresh.m, fresh.v
    state.step += 1
    t = state.step
    # Fold both bias corrections into one step size.
    alpha = learning_rate * np.sqrt(1.0 - beta2**t) / (1.0 - beta1**t)
    for name, theta in tensors.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        theta -= alpha * m / (np.sqrt(v) + eps)
