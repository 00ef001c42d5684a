"""Checkpoint wire format: round trips, byte determinism, corruption."""

from __future__ import annotations

import numpy as np
import pytest

from svaratag.errors import ContractError
from svaratag.tagger.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from svaratag.tagger.network import init_params
from svaratag.tagger.vocab import TagSet, Vocab
from svaratag.text import DEFAULT_INVENTORY, AccentTag


@pytest.fixture
def small_model():
    rng = np.random.default_rng(3)
    vocab = Vocab.from_clusters(["क", "ख", "ग", " "])
    tags = TagSet.from_tags([AccentTag((0x0951,)), AccentTag((0x0952,))])
    params = init_params(len(vocab), len(tags), rng, embed_dim=8, hidden=5, layers=1)
    return params, vocab, tags


def _save(path, params, vocab, tags):
    save_checkpoint(
        path,
        params,
        vocab,
        tags,
        inventory=DEFAULT_INVENTORY,
        config={"learning_rate": 1e-3, "epochs": 20},
        seed=11,
        epoch=7,
        dev_metrics={"wer": 0.1, "cer": 0.05, "der": 0.02},
    )


def test_round_trip_preserves_everything(tmp_path, small_model):
    params, vocab, tags = small_model
    path = tmp_path / "model.ckpt"
    _save(path, params, vocab, tags)
    loaded = load_checkpoint(path)

    assert loaded.vocab.id_to_cluster == vocab.id_to_cluster
    assert loaded.tags.id_to_tag == tags.id_to_tag
    assert loaded.inventory == DEFAULT_INVENTORY
    assert loaded.seed == 11
    assert loaded.epoch == 7
    assert loaded.dev_metrics == {"wer": 0.1, "cer": 0.05, "der": 0.02}
    assert loaded.config["epochs"] == 20
    # Tensors survive exactly at float32 precision and come back float64.
    for name, t in params.tensors.items():
        expected = t.astype(np.float32).astype(np.float64)
        assert loaded.params.tensors[name].dtype == np.float64
        np.testing.assert_array_equal(loaded.params.tensors[name], expected)


def test_save_load_save_is_byte_identical(tmp_path, small_model):
    params, vocab, tags = small_model
    a = tmp_path / "a.ckpt"
    b = tmp_path / "b.ckpt"
    _save(a, params, vocab, tags)
    loaded = load_checkpoint(a)
    _save(b, loaded.params, loaded.vocab, loaded.tags)
    assert a.read_bytes() == b.read_bytes()


def test_header_starts_with_magic(tmp_path, small_model):
    params, vocab, tags = small_model
    path = tmp_path / "m.ckpt"
    _save(path, params, vocab, tags)
    assert path.read_bytes()[:5] == MAGIC


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bogus.ckpt"
    path.write_bytes(b"NOPE!" + b"\x00" * 32)
    with pytest.raises(ContractError, match="magic"):
        load_checkpoint(path)


def test_truncated_tensor_section_rejected(tmp_path, small_model):
    params, vocab, tags = small_model
    path = tmp_path / "m.ckpt"
    _save(path, params, vocab, tags)
    raw = path.read_bytes()
    path.write_bytes(raw[:-10])
    with pytest.raises(ContractError, match="truncated tensor"):
        load_checkpoint(path)


def test_trailing_garbage_rejected(tmp_path, small_model):
    params, vocab, tags = small_model
    path = tmp_path / "m.ckpt"
    _save(path, params, vocab, tags)
    path.write_bytes(path.read_bytes() + b"\x00\x00\x00")
    with pytest.raises(ContractError, match="trailing"):
        load_checkpoint(path)


def test_truncated_metadata_rejected(tmp_path):
    path = tmp_path / "m.ckpt"
    path.write_bytes(MAGIC + (1000).to_bytes(8, "little") + b"{}")
    with pytest.raises(ContractError, match="metadata"):
        load_checkpoint(path)
