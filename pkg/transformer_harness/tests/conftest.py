"""Shared fixtures: small local base checkpoints and a smoke corpus.

The real reference checkpoint is hundreds of megabytes and network-hosted;
tests build randomly initialized models with the same architecture family
(T5 with gated activations, byte-sized vocabulary) saved locally. The
smoke corpus is handcrafted JSONL following the toolkit's corpus schema.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")
os.environ.setdefault("HF_HUB_OFFLINE", "1")

import pytest
import torch

AN, SV = "॒", "॑"
CONSONANTS = [chr(c) for c in range(0x0915, 0x0939)]


def t5_config(d_model: int, d_ff: int, enc: int, dec: int, heads: int, d_kv: int):
    from transformers import T5Config

    return T5Config(
        vocab_size=384,
        d_model=d_model,
        d_kv=d_kv,
        d_ff=d_ff,
        num_layers=enc,
        num_decoder_layers=dec,
        num_heads=heads,
        feed_forward_proj="gated-gelu",
        tie_word_embeddings=False,
        decoder_start_token_id=0,
        pad_token_id=0,
        eos_token_id=1,
    )


def save_random_model(path: Path, **dims) -> str:
    from transformers import T5ForConditionalGeneration

    torch.manual_seed(7)
    model = T5ForConditionalGeneration(t5_config(**dims))
    model.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def tiny_base(tmp_path_factory) -> str:
    """~320k parameters: fast full fine-tuning."""
    path = tmp_path_factory.mktemp("models") / "tiny"
    return save_random_model(path, d_model=64, d_ff=256, enc=2, dec=2, heads=2, d_kv=32)


@pytest.fixture(scope="session")
def mid_base(tmp_path_factory) -> str:
    """~12M parameters: wide enough that rank-8 adapters stay under 1%."""
    path = tmp_path_factory.mktemp("models") / "mid"
    return save_random_model(path, d_model=128, d_ff=3584, enc=4, dec=4, heads=4, d_kv=32)


def make_verse(i: int) -> tuple[str, str]:
    """(unaccented, accented): marks on the second and last cluster."""
    letters = [CONSONANTS[(i // (len(CONSONANTS) ** k)) % len(CONSONANTS)] for k in range(3)]
    source = f"{letters[0]}{letters[1]} {letters[2]} ।"
    target = f"{letters[0]}{letters[1]}{AN} {letters[2]}{SV} ।"
    return source, target


def write_smoke_corpus(root: Path, n: int = 100) -> tuple[Path, Path]:
    corpus = root / "corpus.jsonl"
    manifest = root / "manifest.json"
    ids = []
    lines = [json.dumps({"_meta": {"tool": "fixture"}})]
    for i in range(n):
        source, target = make_verse(i)
        verse_id = f"1.{i // 10 + 1}.{i % 10 + 1}"
        ids.append(verse_id)
        lines.append(
            json.dumps(
                {"id": verse_id, "accented": target, "unaccented": source},
                ensure_ascii=False,
            )
        )
    corpus.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    n_train = int(n * 0.7)
    n_dev = int(n * 0.2)
    manifest.write_text(
        json.dumps(
            {
                "train": ids[:n_train],
                "dev": ids[n_train : n_train + n_dev],
                "test": ids[n_train + n_dev :],
            }
        ),
        encoding="utf-8",
    )
    return corpus, manifest


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory) -> tuple[Path, Path]:
    return write_smoke_corpus(tmp_path_factory.mktemp("corpus"), n=100)
