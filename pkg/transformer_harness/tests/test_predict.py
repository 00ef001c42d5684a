"""Prediction: artifact loading, schema, budgets, invalid output handling."""

import json

import pytest
import torch

from transformer_harness.codec import BYTE_OFFSET, EOS_ID
from transformer_harness.config import FinetuneConfig
from transformer_harness.data import prepare, read_sources
from transformer_harness.errors import CheckpointError
from transformer_harness.finetune import finetune
from transformer_harness.predict import (
    INVALID_OUTPUT_FLAG,
    load_artifact,
    predict_rows,
    write_hypotheses,
)


@pytest.fixture(scope="module")
def artifact(tiny_base, smoke_corpus, tmp_path_factory):
    corpus, manifest = smoke_corpus
    splits = prepare(corpus, manifest)
    config = FinetuneConfig(
        model_id=tiny_base, epochs=2, batch_size=16, learning_rate=1e-3, seed=3
    )
    out = tmp_path_factory.mktemp("artifact")
    return finetune(config, splits.train, out).artifact_dir


def test_load_full_artifact(artifact):
    model, doc = load_artifact(artifact)
    assert doc["mode"] == "full"
    assert not model.training


def test_rows_follow_hypothesis_schema(artifact, smoke_corpus):
    corpus, _ = smoke_corpus
    model, _ = load_artifact(artifact)
    rows = read_sources(corpus)[:8]
    hyps = predict_rows(model, rows, batch_size=4)
    assert [h["id"] for h in hyps] == [i for i, _ in rows]
    for h in hyps:
        assert isinstance(h["accented"], str)


def test_generation_respects_byte_budget(artifact):
    model, _ = load_artifact(artifact)
    source = "क ख ग"
    hyps = predict_rows(model, [("1.1.1", source)])
    # output may stop early, but never exceeds 2x the source byte length
    assert len(hyps[0]["accented"].encode("utf-8")) <= 2 * len(source.encode("utf-8"))


def test_greedy_is_deterministic(artifact):
    model, _ = load_artifact(artifact)
    rows = [("1.1.1", "कख ग ।"), ("1.1.2", "घङ च ।")]
    assert predict_rows(model, rows) == predict_rows(model, rows)


def test_invalid_output_bytes_flagged_empty(artifact, monkeypatch):
    model, _ = load_artifact(artifact)

    def bad_generate(**kwargs):
        n = kwargs["input_ids"].shape[0]
        return torch.tensor([[0, 0xFF + BYTE_OFFSET, EOS_ID]] * n)

    monkeypatch.setattr(model, "generate", bad_generate)
    hyps = predict_rows(model, [("1.1.1", "क")])
    assert hyps == [{"id": "1.1.1", "accented": "", "flags": [INVALID_OUTPUT_FLAG]}]


def test_empty_input_empty_output(artifact, tmp_path):
    model, _ = load_artifact(artifact)
    hyps = predict_rows(model, [])
    assert hyps == []
    write_hypotheses(hyps, tmp_path / "h.jsonl")
    lines = (tmp_path / "h.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 and "_meta" in json.loads(lines[0])


def test_not_an_artifact(tmp_path):
    with pytest.raises(CheckpointError, match="harness.json"):
        load_artifact(tmp_path)
