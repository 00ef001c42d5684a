"""Training loop: config validation, loss descent, determinism, divergence."""

from __future__ import annotations

import io
import json
import warnings

import numpy as np
import pytest

from svaratag.errors import ContractError, TrainingDiverged
from svaratag.synthetic import make_rule_corpus
from svaratag.tagger.checkpoint import save_checkpoint
from svaratag.tagger.train import TrainConfig, train

SMALL = dict(embed_dim=12, hidden=8, layers=1)


@pytest.fixture(scope="module")
def tiny_corpus():
    return make_rule_corpus(24, 8, seed=5)


def small_train(cfg, corpus, **kw):
    train_pairs, dev_pairs = corpus
    return train(cfg, train_pairs, dev_pairs, **SMALL, **kw)


class TestConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.learning_rate == pytest.approx(1e-3)
        assert cfg.epochs == 20
        assert cfg.dropout == pytest.approx(0.3)
        assert cfg.batch_size == 32
        assert cfg.clip_norm == pytest.approx(5.0)
        assert cfg.early_stop_metric == "dev_der"

    @pytest.mark.parametrize(
        "kw",
        [
            {"learning_rate": 0.0},
            {"learning_rate": -1.0},
            {"dropout": 1.0},
            {"dropout": -0.1},
            {"epochs": 0},
            {"batch_size": 0},
            {"clip_norm": 0.0},
            {"early_stop_metric": "dev_wer"},
        ],
    )
    def test_invalid_rejected(self, kw):
        with pytest.raises(ContractError):
            TrainConfig(**kw)

    def test_dict_round_trip(self):
        cfg = TrainConfig(seed=9, dropout=0.1)
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg

    def test_from_dict_rejects_unknown_field(self):
        with pytest.raises(ContractError, match="unknown"):
            TrainConfig.from_dict({"learning_rate": 1e-3, "momentum": 0.9})


class TestTraining:
    def test_loss_decreases_after_first_epoch(self, tiny_corpus):
        cfg = TrainConfig(epochs=2, batch_size=8, seed=0)
        result = small_train(cfg, tiny_corpus)
        assert result.history[0].train_loss < result.initial_loss

    def test_history_and_log_stream(self, tiny_corpus):
        stream = io.StringIO()
        cfg = TrainConfig(epochs=2, batch_size=8, seed=0)
        result = small_train(cfg, tiny_corpus, log_stream=stream)
        lines = [json.loads(l) for l in stream.getvalue().splitlines()]
        assert len(lines) == len(result.history)
        for line, record in zip(lines, result.history):
            assert line == {
                "epoch": record.epoch,
                "trainLoss": record.train_loss,
                "devWer": record.dev_wer,
                "devCer": record.dev_cer,
                "devDer": record.dev_der,
            }

    def test_best_epoch_is_first_dev_der_minimum(self, tiny_corpus):
        cfg = TrainConfig(epochs=3, batch_size=8, seed=1)
        result = small_train(cfg, tiny_corpus)
        ders = [r.dev_der for r in result.history]
        assert result.best_epoch == int(np.argmin(ders)) + 1
        assert result.checkpoint.epoch == result.best_epoch
        assert result.checkpoint.dev_metrics["der"] == pytest.approx(min(ders))

    def test_stop_threshold_halts_after_first_epoch(self, tiny_corpus):
        # A threshold above any possible DER makes epoch 1 the last one.
        cfg = TrainConfig(epochs=5, batch_size=8, seed=0, stop_when_dev_der=100.0)
        result = small_train(cfg, tiny_corpus)
        assert len(result.history) == 1
        assert result.stopped_early

    def test_same_seed_same_checkpoint_bytes(self, tiny_corpus, tmp_path):
        cfg = TrainConfig(epochs=2, batch_size=8, seed=42)
        paths = []
        for name in ("a", "b"):
            result = small_train(cfg, tiny_corpus)
            ckpt = result.checkpoint
            path = tmp_path / f"{name}.ckpt"
            save_checkpoint(
                path, ckpt.params, ckpt.vocab, ckpt.tags, ckpt.inventory,
                ckpt.config, ckpt.seed, ckpt.epoch, ckpt.dev_metrics,
            )
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_different_seed_changes_checkpoint(self, tiny_corpus):
        r1 = small_train(TrainConfig(epochs=1, batch_size=8, seed=0), tiny_corpus)
        r2 = small_train(TrainConfig(epochs=1, batch_size=8, seed=1), tiny_corpus)
        a = r1.checkpoint.params.tensors["proj_W"]
        b = r2.checkpoint.params.tensors["proj_W"]
        assert not np.array_equal(a, b)

    def test_empty_sets_rejected(self, tiny_corpus):
        train_pairs, dev_pairs = tiny_corpus
        cfg = TrainConfig(epochs=1)
        with pytest.raises(ContractError):
            train(cfg, [], dev_pairs, **SMALL)
        with pytest.raises(ContractError):
            train(cfg, train_pairs, [], **SMALL)

    def test_train_dev_overlap_rejected(self, tiny_corpus):
        train_pairs, _ = tiny_corpus
        cfg = TrainConfig(epochs=1)
        with pytest.raises(ContractError, match="overlap"):
            train(cfg, train_pairs, train_pairs[:2], **SMALL)

    def test_divergence_raises_with_location(self, tiny_corpus):
        cfg = TrainConfig(learning_rate=1e307, epochs=2, batch_size=8, seed=0, dropout=0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            with pytest.raises(TrainingDiverged, match="epoch"):
                small_train(cfg, tiny_corpus)
