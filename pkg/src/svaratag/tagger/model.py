"""Full tagger loss: BiLSTM emissions feeding a linear-chain CRF."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from . import crf as crf_mod
from . import network


def batch_loss_and_grads(
    params: network.TaggerParams,
    ids: np.ndarray,  # (B, L)
    mask: np.ndarray,  # (B, L)
    gold: np.ndarray,  # (B, L), pad positions ignored
    dropout_mask: np.ndarray | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean per-sequence CRF negative log-likelihood and all its gradients."""
    batch = ids.shape[0]
    if batch == 0:
        raise ContractError("empty batch")
    emissions, cache = network.forward(params, ids, mask, dropout_mask)
    transitions = params.crf
    n_tags = params.n_tags

    total_nll = 0.0
    d_emissions = np.zeros_like(emissions)
    d_matrix = np.zeros((n_tags, n_tags))
    d_start = np.zeros(n_tags)
    d_end = np.zeros(n_tags)
    inv_b = 1.0 / batch
    for b in range(batch):
        length = int(mask[b].sum())
        if length == 0:
            raise ContractError(f"zero-length sequence at batch index {b}")
        nll, d_em, d_m, d_s, d_e = crf_mod.crf_nll_and_grads(
            emissions[b, :length], transitions, gold[b, :length]
        )
        total_nll += nll
        d_emissions[b, :length] = d_em * inv_b
        d_matrix += d_m
        d_start += d_s
        d_end += d_e

    grads = network.backward(params, cache, d_emissions, dropout_mask)
    grads["crf_matrix"] = d_matrix * inv_b
    grads["crf_start"] = d_start * inv_b
    grads["crf_end"] = d_end * inv_b
    return total_nll * inv_b, grads


def decode(
    params: network.TaggerParams,
    input_ids: list[int],
    forced_empty_positions: set[int] | None = None,
    empty_tag_id: int = 0,
) -> list[int]:
    """Viterbi tag ids for one sequence.

    ``forced_empty_positions`` pins the empty tag at those positions
    (whitespace/danda clusters carry mandatory-empty accents), implemented
    by masking every other tag's emission score there.
    """
    if not input_ids:
        return []
    em = network.emissions(params, input_ids, training_mode=False)
    if forced_empty_positions:
        em = em.copy()
        for pos in forced_empty_positions:
            if not 0 <= pos < em.shape[0]:
                raise ContractError(f"forced position {pos} out of range")
            row = np.full(params.n_tags, -1e30)
            row[empty_tag_id] = em[pos, empty_tag_id]
            em[pos] = row
    path, _ = crf_mod.viterbi(em, params.crf)
    return path
