"""Binary checkpoint format for the tagger.

Layout: 5-byte magic ``VACR1``, a little-endian uint64 byte length, a JSON
metadata document (sorted keys, ASCII), then the raw tensors as
little-endian float32 in the order declared by ``tensorOrder``.

The metadata carries everything needed to rebuild the model and its input
mapping: dims, shapes, vocabulary, tag set (as codepoint lists), accent
inventory, training config, seed, epoch, and dev metrics. No timestamps or
host details are written, so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import ContractError
from ..text import AccentTag
from .network import INIT_NOTE, TaggerParams
from .vocab import PAD_TOKEN, UNK_TOKEN, TagSet, Vocab

MAGIC = b"VACR1"
FORMAT_VERSION = 1
_LEN = struct.Struct("<Q")


@dataclass(frozen=True)
class Checkpoint:
    """Everything a restorer needs: weights plus the symbol tables."""

    params: TaggerParams
    vocab: Vocab
    tags: TagSet
    inventory: frozenset[int]
    config: dict[str, Any]
    seed: int
    epoch: int
    dev_metrics: dict[str, float]


def _metadata(
    params: TaggerParams,
    vocab: Vocab,
    tags: TagSet,
    inventory: frozenset[int],
    config: Mapping[str, Any],
    seed: int,
    epoch: int,
    dev_metrics: Mapping[str, float],
) -> dict[str, Any]:
    order = list(params.tensors.keys())
    return {
        "formatVersion": FORMAT_VERSION,
        "dims": {
            "embedDim": params.embed_dim,
            "hidden": params.hidden,
            "layers": params.layers,
            "vocabSize": params.vocab_size,
            "nTags": params.n_tags,
        },
        "tensorOrder": order,
        "shapes": {name: list(t.shape) for name, t in params.tensors.items()},
        "vocab": {
            "reserved": [PAD_TOKEN, UNK_TOKEN],
            "clusters": list(vocab.id_to_cluster[2:]),
        },
        "tags": [list(t.codepoints) for t in tags.id_to_tag],
        "inventory": [f"{cp:04X}" for cp in sorted(inventory)],
        "config": dict(config),
        "seed": seed,
        "epoch": epoch,
        "devMetrics": dict(dev_metrics),
        "initNote": INIT_NOTE,
    }


def save_checkpoint(
    path: str | Path,
    params: TaggerParams,
    vocab: Vocab,
    tags: TagSet,
    inventory: frozenset[int],
    config: Mapping[str, Any],
    seed: int,
    epoch: int,
    dev_metrics: Mapping[str, float],
) -> None:
    meta = _metadata(params, vocab, tags, inventory, config, seed, epoch, dev_metrics)
    blob = json.dumps(meta, sort_keys=True, ensure_ascii=True).encode("ascii")
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(_LEN.pack(len(blob)))
        fh.write(blob)
        for name in meta["tensorOrder"]:
            tensor = np.ascontiguousarray(params.tensors[name], dtype="<f4")
            fh.write(tensor.tobytes())


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + _LEN.size or raw[: len(MAGIC)] != MAGIC:
        raise ContractError(f"{path}: not a tagger checkpoint (bad magic)")
    (blob_len,) = _LEN.unpack_from(raw, len(MAGIC))
    head = len(MAGIC) + _LEN.size
    if head + blob_len > len(raw):
        raise ContractError(f"{path}: truncated metadata block")
    try:
        meta = json.loads(raw[head : head + blob_len].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContractError(f"{path}: unreadable metadata: {exc}") from exc
    if meta.get("formatVersion") != FORMAT_VERSION:
        raise ContractError(
            f"{path}: unsupported format version {meta.get('formatVersion')!r}"
        )

    tensors: dict[str, np.ndarray] = {}
    offset = head + blob_len
    for name in meta["tensorOrder"]:
        shape = tuple(meta["shapes"][name])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(raw):
            raise ContractError(f"{path}: truncated tensor {name!r}")
        flat = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        tensors[name] = flat.reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(raw):
        raise ContractError(f"{path}: {len(raw) - offset} trailing bytes after tensors")

    dims = meta["dims"]
    params = TaggerParams(
        tensors=tensors,
        embed_dim=int(dims["embedDim"]),
        hidden=int(dims["hidden"]),
        layers=int(dims["layers"]),
    )
    reserved = meta["vocab"]["reserved"]
    if reserved != [PAD_TOKEN, UNK_TOKEN]:
        raise ContractError(f"{path}: unexpected reserved tokens {reserved}")
    id_to_cluster = (*reserved, *meta["vocab"]["clusters"])
    vocab = Vocab(
        cluster_to_id={c: i for i, c in enumerate(id_to_cluster) if i >= 2},
        id_to_cluster=id_to_cluster,
    )
    id_to_tag = tuple(AccentTag(tuple(cps)) for cps in meta["tags"])
    tags = TagSet(tag_to_id={t: i for i, t in enumerate(id_to_tag)}, id_to_tag=id_to_tag)
    inventory = frozenset(int(h, 16) for h in meta["inventory"])
    if len(vocab) != params.vocab_size or len(tags) != params.n_tags:
        raise ContractError(
            f"{path}: symbol tables ({len(vocab)} clusters, {len(tags)} tags) do not "
            f"match tensor dims ({params.vocab_size}, {params.n_tags})"
        )
    return Checkpoint(
        params=params,
        vocab=vocab,
        tags=tags,
        inventory=inventory,
        config=meta["config"],
        seed=int(meta["seed"]),
        epoch=int(meta["epoch"]),
        dev_metrics={k: float(v) for k, v in meta["devMetrics"].items()},
    )
