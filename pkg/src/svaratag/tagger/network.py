"""Batched bidirectional LSTM encoder with hand-derived backpropagation.

Architecture: embedding (|V| x 256) -> 2 bidirectional LSTM layers with 512
units per direction (layer inputs are the concatenated 1024-wide outputs of
the previous layer) -> one inverted-dropout site on the final concatenation
-> linear emission projection 1024 -> |T|.

Everything is float64 numpy.  Padding uses a per-position mask: states carry
through masked steps unchanged, which makes right-padded batches equivalent
to per-sequence processing in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import ContractError
from .crf import CrfTransitions

EMBED_DIM = 256
HIDDEN = 512
LAYERS = 2

#: Gate block order inside every (in, 4H) weight matrix and bias.
GATE_ORDER = ("input", "forget", "cell", "output")

INIT_NOTE = (
    "embeddings/projections uniform +-sqrt(6/(fanIn+fanOut)) per gate block; "
    "recurrent matrices orthogonal per gate block; biases zero except "
    "forget-gate bias 1.0; CRF transitions zero"
)


@dataclass
class TaggerParams:
    """Named parameter tensors in a fixed declared order."""

    tensors: dict[str, np.ndarray]
    embed_dim: int = EMBED_DIM
    hidden: int = HIDDEN
    layers: int = LAYERS

    def __post_init__(self) -> None:
        for name, t in self.tensors.items():
            if not np.isfinite(t).all():
                raise ContractError(f"non-finite values in parameter {name}")

    @property
    def vocab_size(self) -> int:
        return self.tensors["embed"].shape[0]

    @property
    def n_tags(self) -> int:
        return self.tensors["proj_W"].shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.tensors)

    @property
    def crf(self) -> CrfTransitions:
        return CrfTransitions(
            matrix=self.tensors["crf_matrix"],
            start=self.tensors["crf_start"],
            end=self.tensors["crf_end"],
        )

    def n_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def copy(self) -> "TaggerParams":
        return TaggerParams(
            {k: v.copy() for k, v in self.tensors.items()},
            embed_dim=self.embed_dim,
            hidden=self.hidden,
            layers=self.layers,
        )


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...]) -> np.ndarray:
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=shape)


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))  # sign fix makes the factorization unique


def init_params(
    vocab_size: int,
    n_tags: int,
    rng: np.random.Generator,
    embed_dim: int = EMBED_DIM,
    hidden: int = HIDDEN,
    layers: int = LAYERS,
) -> TaggerParams:
    """Fresh parameters; per-gate Xavier/orthogonal init, zero CRF."""
    if vocab_size < 2 or n_tags < 1:
        raise ContractError(f"degenerate sizes: |V|={vocab_size}, |T|={n_tags}")
    tensors: dict[str, np.ndarray] = {}
    tensors["embed"] = _xavier(rng, vocab_size, embed_dim, (vocab_size, embed_dim))
    for layer in range(layers):
        in_dim = embed_dim if layer == 0 else 2 * hidden
        for direction in ("f", "b"):
            prefix = f"lstm{layer}{direction}"
            wx = np.empty((in_dim, 4 * hidden))
            wh = np.empty((hidden, 4 * hidden))
            for g in range(4):
                sl = slice(g * hidden, (g + 1) * hidden)
                wx[:, sl] = _xavier(rng, in_dim, hidden, (in_dim, hidden))
                wh[:, sl] = _orthogonal(rng, hidden)
            b = np.zeros(4 * hidden)
            b[hidden : 2 * hidden] = 1.0  # forget-gate bias
            tensors[f"{prefix}_Wx"] = wx
            tensors[f"{prefix}_Wh"] = wh
            tensors[f"{prefix}_b"] = b
    tensors["proj_W"] = _xavier(rng, 2 * hidden, n_tags, (2 * hidden, n_tags))
    tensors["proj_b"] = np.zeros(n_tags)
    tensors["crf_matrix"] = np.zeros((n_tags, n_tags))
    tensors["crf_start"] = np.zeros(n_tags)
    tensors["crf_end"] = np.zeros(n_tags)
    return TaggerParams(tensors, embed_dim=embed_dim, hidden=hidden, layers=layers)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


@dataclass
class _DirectionCache:
    gates: np.ndarray  # (L, B, 4H) post-activation i|f|g|o
    c: np.ndarray  # (L, B, H) post-mask cell states
    h: np.ndarray  # (L, B, H) post-mask hidden states
    order: tuple[int, ...]  # processing order over time


@dataclass
class ForwardCache:
    ids: np.ndarray
    mask_t: np.ndarray  # (L, B, 1)
    layer_inputs: list[np.ndarray]  # (L, B, in) per layer
    directions: list[tuple[_DirectionCache, _DirectionCache]]
    concat: np.ndarray  # (L, B, 2H) final layer output, pre-dropout
    dropped: np.ndarray  # (L, B, 2H) after dropout mask (or alias of concat)


def _lstm_direction(
    x: np.ndarray,  # (L, B, in)
    mask_t: np.ndarray,  # (L, B, 1)
    wx: np.ndarray,
    wh: np.ndarray,
    b: np.ndarray,
    reverse: bool,
    hidden: int,
) -> _DirectionCache:
    length, batch, _ = x.shape
    h_state = np.zeros((batch, hidden))
    c_state = np.zeros((batch, hidden))
    gates = np.empty((length, batch, 4 * hidden))
    c_seq = np.empty((length, batch, hidden))
    h_seq = np.empty((length, batch, hidden))
    order = tuple(range(length - 1, -1, -1) if reverse else range(length))
    hh = hidden
    for t in order:
        z = x[t] @ wx + h_state @ wh + b
        i = _sigmoid(z[:, :hh])
        f = _sigmoid(z[:, hh : 2 * hh])
        g = np.tanh(z[:, 2 * hh : 3 * hh])
        o = _sigmoid(z[:, 3 * hh :])
        c_cand = f * c_state + i * g
        h_cand = o * np.tanh(c_cand)
        m = mask_t[t]
        c_state = m * c_cand + (1.0 - m) * c_state
        h_state = m * h_cand + (1.0 - m) * h_state
        gates[t, :, :hh] = i
        gates[t, :, hh : 2 * hh] = f
        gates[t, :, 2 * hh : 3 * hh] = g
        gates[t, :, 3 * hh :] = o
        c_seq[t] = c_state
        h_seq[t] = h_state
    return _DirectionCache(gates=gates, c=c_seq, h=h_seq, order=order)


def _lstm_direction_backward(
    d_h_seq: np.ndarray,  # (L, B, H) grad wrt post-mask h outputs
    cache: _DirectionCache,
    x: np.ndarray,  # (L, B, in) layer input
    mask_t: np.ndarray,
    wx: np.ndarray,
    wh: np.ndarray,
    hidden: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Returns (d_x, d_wx, d_wh, d_b)."""
    length, batch, _ = x.shape
    hh = hidden
    d_x = np.zeros_like(x)
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(4 * hh)
    dh_next = np.zeros((batch, hh))
    dc_next = np.zeros((batch, hh))
    order = cache.order
    for idx in range(length - 1, -1, -1):
        t = order[idx]
        prev_t = order[idx - 1] if idx > 0 else None
        h_prev = cache.h[prev_t] if prev_t is not None else np.zeros((batch, hh))
        c_prev = cache.c[prev_t] if prev_t is not None else np.zeros((batch, hh))
        i = cache.gates[t, :, :hh]
        f = cache.gates[t, :, hh : 2 * hh]
        g = cache.gates[t, :, 2 * hh : 3 * hh]
        o = cache.gates[t, :, 3 * hh :]
        m = mask_t[t]
        dh_total = d_h_seq[t] + dh_next
        dc_total = dc_next
        dh_cand = m * dh_total
        dc_cand = m * dc_total
        dh_carry = (1.0 - m) * dh_total
        dc_carry = (1.0 - m) * dc_total
        # cache.c[t] equals c_cand wherever m == 1; masked entries only ever
        # meet zero gradients below.
        tanh_c = np.tanh(cache.c[t])
        do = dh_cand * tanh_c
        dc_cand = dc_cand + dh_cand * o * (1.0 - tanh_c * tanh_c)
        df = dc_cand * c_prev
        di = dc_cand * g
        dg = dc_cand * i
        dc_prev = dc_cand * f + dc_carry
        dz = np.empty((batch, 4 * hh))
        dz[:, :hh] = di * i * (1.0 - i)
        dz[:, hh : 2 * hh] = df * f * (1.0 - f)
        dz[:, 2 * hh : 3 * hh] = dg * (1.0 - g * g)
        dz[:, 3 * hh :] = do * o * (1.0 - o)
        d_wx += x[t].T @ dz
        d_wh += h_prev.T @ dz
        d_b += dz.sum(axis=0)
        d_x[t] = dz @ wx.T
        dh_next = dz @ wh.T + dh_carry
        dc_next = dc_prev
    return d_x, d_wx, d_wh, d_b


def forward(
    params: TaggerParams,
    ids: np.ndarray,  # (B, L) int
    mask: np.ndarray,  # (B, L) 1.0 real / 0.0 pad
    dropout_mask: np.ndarray | None = None,  # (B, L, 2H), pre-scaled inverted dropout
) -> tuple[np.ndarray, ForwardCache]:
    """Emissions (B, L, |T|) plus the cache needed for backward()."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 2:
        raise ContractError(f"ids must be (batch, length), got {ids.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= params.vocab_size):
        raise ContractError(
            f"input id out of range [0, {params.vocab_size}): {int(ids.min())}..{int(ids.max())}"
        )
    if mask.shape != ids.shape:
        raise ContractError(f"mask shape {mask.shape} != ids shape {ids.shape}")
    batch, length = ids.shape
    hidden = params.hidden
    mask_t = np.ascontiguousarray(mask.T, dtype=np.float64)[:, :, None]  # (L, B, 1)

    x = params.tensors["embed"][ids]  # (B, L, E)
    layer_in = np.ascontiguousarray(np.transpose(x, (1, 0, 2)))  # (L, B, E)
    layer_inputs: list[np.ndarray] = []
    directions: list[tuple[_DirectionCache, _DirectionCache]] = []
    for layer in range(params.layers):
        layer_inputs.append(layer_in)
        fwd = _lstm_direction(
            layer_in, mask_t,
            params.tensors[f"lstm{layer}f_Wx"],
            params.tensors[f"lstm{layer}f_Wh"],
            params.tensors[f"lstm{layer}f_b"],
            reverse=False, hidden=hidden,
        )
        bwd = _lstm_direction(
            layer_in, mask_t,
            params.tensors[f"lstm{layer}b_Wx"],
            params.tensors[f"lstm{layer}b_Wh"],
            params.tensors[f"lstm{layer}b_b"],
            reverse=True, hidden=hidden,
        )
        directions.append((fwd, bwd))
        layer_in = np.concatenate([fwd.h, bwd.h], axis=2)  # (L, B, 2H)

    concat = layer_in
    if dropout_mask is not None:
        if dropout_mask.shape != (batch, length, 2 * hidden):
            raise ContractError(
                f"dropout mask shape {dropout_mask.shape} != {(batch, length, 2 * hidden)}"
            )
        dropped = concat * np.transpose(dropout_mask, (1, 0, 2))
    else:
        dropped = concat
    emissions = dropped @ params.tensors["proj_W"] + params.tensors["proj_b"]  # (L, B, T)
    cache = ForwardCache(
        ids=ids,
        mask_t=mask_t,
        layer_inputs=layer_inputs,
        directions=directions,
        concat=concat,
        dropped=dropped,
    )
    return np.transpose(emissions, (1, 0, 2)), cache


def backward(
    params: TaggerParams,
    cache: ForwardCache,
    d_emissions: np.ndarray,  # (B, L, T)
    dropout_mask: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss with the given emission gradients."""
    batch, length = cache.ids.shape
    hidden = params.hidden
    grads: dict[str, np.ndarray] = {}
    d_em = np.transpose(d_emissions, (1, 0, 2))  # (L, B, T)

    flat_dropped = cache.dropped.reshape(-1, 2 * hidden)
    flat_dem = d_em.reshape(-1, params.n_tags)
    grads["proj_W"] = flat_dropped.T @ flat_dem
    grads["proj_b"] = flat_dem.sum(axis=0)
    d_dropped = d_em @ params.tensors["proj_W"].T  # (L, B, 2H)
    if dropout_mask is not None:
        d_out = d_dropped * np.transpose(dropout_mask, (1, 0, 2))
    else:
        d_out = d_dropped

    for layer in range(params.layers - 1, -1, -1):
        fwd, bwd = cache.directions[layer]
        layer_in = cache.layer_inputs[layer]
        d_fwd = np.ascontiguousarray(d_out[:, :, :hidden])
        d_bwd = np.ascontiguousarray(d_out[:, :, hidden:])
        dx_f, dwx_f, dwh_f, db_f = _lstm_direction_backward(
            d_fwd, fwd, layer_in, cache.mask_t,
            params.tensors[f"lstm{layer}f_Wx"], params.tensors[f"lstm{layer}f_Wh"], hidden,
        )
        dx_b, dwx_b, dwh_b, db_b = _lstm_direction_backward(
            d_bwd, bwd, layer_in, cache.mask_t,
            params.tensors[f"lstm{layer}b_Wx"], params.tensors[f"lstm{layer}b_Wh"], hidden,
        )
        grads[f"lstm{layer}f_Wx"] = dwx_f
        grads[f"lstm{layer}f_Wh"] = dwh_f
        grads[f"lstm{layer}f_b"] = db_f
        grads[f"lstm{layer}b_Wx"] = dwx_b
        grads[f"lstm{layer}b_Wh"] = dwh_b
        grads[f"lstm{layer}b_b"] = db_b
        d_out = dx_f + dx_b  # gradient w.r.t. this layer's input

    d_embed = np.zeros_like(params.tensors["embed"])
    d_x = np.transpose(d_out, (1, 0, 2)).reshape(-1, params.embed_dim)
    np.add.at(d_embed, cache.ids.reshape(-1), d_x)
    grads["embed"] = d_embed
    return grads


def emissions(
    params: TaggerParams,
    input_ids: Iterable[int],
    training_mode: bool = False,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Emission matrix (length x |T|) for one unpadded sequence.

    Deterministic in eval mode; in training mode an inverted-dropout mask is
    sampled from ``rng`` (required when dropout > 0).
    """
    ids = np.asarray(list(input_ids), dtype=np.int64)
    if ids.size == 0:
        return np.zeros((0, params.n_tags))
    batch_ids = ids[None, :]
    mask = np.ones_like(batch_ids, dtype=np.float64)
    dropout_mask = None
    if training_mode and dropout > 0.0:
        if rng is None:
            raise ContractError("training-mode emissions with dropout need an rng")
        dropout_mask = make_dropout_mask(rng, (1, ids.size, 2 * params.hidden), dropout)
    out, _ = forward(params, batch_ids, mask, dropout_mask)
    return out[0]


def make_dropout_mask(
    rng: np.random.Generator,
    shape: tuple[int, ...],
    dropout: float,
) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability ``dropout``, survivors
    scaled by 1/(1-dropout) so expectations match eval mode."""
    if not 0.0 <= dropout < 1.0:
        raise ContractError(f"dropout must be in [0, 1), got {dropout}")
    keep = 1.0 - dropout
    return (rng.random(shape) < keep).astype(np.float64) / keep
