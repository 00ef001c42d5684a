"""Mini-batch CRF training with per-epoch dev evaluation.

A single seeded generator drives initialization, epoch shuffles, and
dropout masks in a fixed order, so one seed on one thread reproduces the
run bit for bit. The checkpoint with the best dev DER is the one returned;
training stops early once dev DER reaches the configured floor.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from ..corpus import VersePair
from ..errors import ContractError, TrainingDiverged
from ..metrics import corpus_report
from ..text import DEFAULT_INVENTORY, extract_labels, segment
from .adam import AdamState, adam_step, clip_global_norm
from .checkpoint import Checkpoint
from .model import batch_loss_and_grads
from .network import EMBED_DIM, HIDDEN, LAYERS, TaggerParams, init_params, make_dropout_mask
from .restore import AccentRestorer
from .vocab import PAD_ID, TagSet, Vocab, build_vocab_and_tags

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; architecture sizes are not configurable here."""

    learning_rate: float = 1e-3
    epochs: int = 20
    dropout: float = 0.3
    batch_size: int = 32
    seed: int = 0
    clip_norm: float = 5.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    early_stop_metric: str = "dev_der"
    #: Stop as soon as dev DER is <= this; 0.0 stops only on a perfect dev set.
    stop_when_dev_der: float = 0.0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ContractError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.dropout < 1.0:
            raise ContractError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ContractError("epochs and batch size must be at least 1")
        if self.clip_norm <= 0:
            raise ContractError(f"clip norm must be positive, got {self.clip_norm}")
        if self.early_stop_metric != "dev_der":
            raise ContractError(f"unsupported early-stop metric {self.early_stop_metric!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ContractError(f"unknown TrainConfig fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_wer: float
    dev_cer: float
    dev_der: float

    def to_json_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "trainLoss": self.train_loss,
            "devWer": self.dev_wer,
            "devCer": self.dev_cer,
            "devDer": self.dev_der,
        }


@dataclass(frozen=True)
class TrainResult:
    checkpoint: Checkpoint
    history: tuple[EpochRecord, ...]
    initial_loss: float
    best_epoch: int
    stopped_early: bool


@dataclass(frozen=True)
class _Encoded:
    verse_id: str
    ids: tuple[int, ...]
    gold: tuple[int, ...]


def _encode_pairs(
    pairs: Sequence[VersePair],
    vocab: Vocab,
    tags: TagSet,
    inventory: frozenset[int],
) -> list[_Encoded]:
    encoded: list[_Encoded] = []
    skipped = 0
    for pair in pairs:
        unaccented, labels = extract_labels(pair.accented, inventory=inventory)
        if not labels:
            skipped += 1
            continue
        bases = [c.base for c in segment(unaccented, inventory=inventory, strict=True)]
        encoded.append(
            _Encoded(
                verse_id=pair.id,
                ids=tuple(vocab.encode(bases)),
                gold=tuple(tags.id_of(t) for t in labels),
            )
        )
    if skipped:
        logger.warning("skipped %d empty verses", skipped)
    if not encoded:
        raise ContractError("no non-empty training verses")
    return encoded


def _pad_batch(batch: Sequence[_Encoded]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    b = len(batch)
    longest = max(len(e.ids) for e in batch)
    ids = np.full((b, longest), PAD_ID, dtype=np.int64)
    mask = np.zeros((b, longest), dtype=np.float64)
    gold = np.zeros((b, longest), dtype=np.int64)
    for i, e in enumerate(batch):
        n = len(e.ids)
        ids[i, :n] = e.ids
        mask[i, :n] = 1.0
        gold[i, :n] = e.gold
    return ids, mask, gold


def mean_loss(
    params: TaggerParams, encoded: Sequence[_Encoded], batch_size: int
) -> float:
    """Dropout-free mean NLL over a dataset (used for the pre-training loss)."""
    total = 0.0
    for lo in range(0, len(encoded), batch_size):
        batch = encoded[lo : lo + batch_size]
        ids, mask, gold = _pad_batch(batch)
        loss, _ = batch_loss_and_grads(params, ids, mask, gold, dropout_mask=None)
        total += loss * len(batch)
    return total / len(encoded)


def _dev_metrics(
    params: TaggerParams,
    vocab: Vocab,
    tags: TagSet,
    inventory: frozenset[int],
    config: TrainConfig,
    dev_pairs: Sequence[VersePair],
) -> dict[str, float]:
    snapshot = Checkpoint(
        params=params,
        vocab=vocab,
        tags=tags,
        inventory=inventory,
        config=config.to_dict(),
        seed=config.seed,
        epoch=0,
        dev_metrics={},
    )
    restorer = AccentRestorer(snapshot)
    refs = [(p.id, p.accented) for p in dev_pairs]
    hyps = [(p.id, restorer.restore_verse(p.unaccented)) for p in dev_pairs]
    report = corpus_report(refs, hyps, inventory=inventory)
    return {"wer": report.wer, "cer": report.cer, "der": report.der}


def train(
    config: TrainConfig,
    train_pairs: Sequence[VersePair],
    dev_pairs: Sequence[VersePair],
    inventory: frozenset[int] = DEFAULT_INVENTORY,
    log_stream: TextIO | None = None,
    embed_dim: int = EMBED_DIM,
    hidden: int = HIDDEN,
    layers: int = LAYERS,
) -> TrainResult:
    """Fit the tagger and return the best-dev-DER checkpoint.

    ``log_stream`` receives one JSON line per epoch (train loss plus dev
    WER/CER/DER). Divergence (non-finite loss or gradients) raises
    :class:`TrainingDiverged` with the epoch and batch in the message.
    """
    if not train_pairs:
        raise ContractError("empty training set")
    if not dev_pairs:
        raise ContractError("empty dev set")
    overlap = {p.id for p in train_pairs} & {p.id for p in dev_pairs}
    if overlap:
        raise ContractError(f"train/dev overlap on {len(overlap)} verse ids")

    vocab, tags = build_vocab_and_tags(train_pairs, inventory)
    encoded = _encode_pairs(train_pairs, vocab, tags, inventory)

    rng = np.random.default_rng(config.seed)
    params = init_params(len(vocab), len(tags), rng, embed_dim=embed_dim, hidden=hidden, layers=layers)
    state = AdamState.for_tensors(params.tensors)

    initial_loss = mean_loss(params, encoded, config.batch_size)
    logger.info("initial train loss %.6f over %d verses", initial_loss, len(encoded))

    best_params: TaggerParams | None = None
    best_der = math.inf
    best_epoch = 0
    best_metrics: dict[str, float] = {}
    history: list[EpochRecord] = []
    stopped_early = False
    hidden2 = 2 * hidden

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(encoded))
        epoch_loss = 0.0
        for batch_index, lo in enumerate(range(0, len(encoded), config.batch_size)):
            batch = [encoded[i] for i in order[lo : lo + config.batch_size]]
            ids, mask, gold = _pad_batch(batch)
            dropout_mask = None
            if config.dropout > 0.0:
                dropout_mask = make_dropout_mask(
                    rng, (ids.shape[0], ids.shape[1], hidden2), config.dropout
                )
            where = f"epoch {epoch}, batch {batch_index + 1}"
            try:
                loss, grads = batch_loss_and_grads(params, ids, mask, gold, dropout_mask)
            except FloatingPointError as exc:
                raise TrainingDiverged(f"non-finite forward pass at {where}: {exc}") from exc
            if not math.isfinite(loss):
                raise TrainingDiverged(f"loss {loss} at {where}")
            grad_norm = clip_global_norm(grads, config.clip_norm)
            if not math.isfinite(grad_norm):
                raise TrainingDiverged(f"gradient norm {grad_norm} at {where}")
            adam_step(
                params.tensors,
                grads,
                state,
                config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
                eps=config.eps,
            )
            epoch_loss += loss * len(batch)
        epoch_loss /= len(encoded)

        dev = _dev_metrics(params, vocab, tags, inventory, config, dev_pairs)
        record = EpochRecord(
            epoch=epoch,
            train_loss=epoch_loss,
            dev_wer=dev["wer"],
            dev_cer=dev["cer"],
            dev_der=dev["der"],
        )
        history.append(record)
        if log_stream is not None:
            log_stream.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")
            log_stream.flush()
        logger.info(
            "epoch %d: train loss %.6f, dev WER %.4f CER %.4f DER %.4f",
            epoch, epoch_loss, dev["wer"], dev["cer"], dev["der"],
        )

        if dev["der"] < best_der:
            best_der = dev["der"]
            best_epoch = epoch
            best_params = params.copy()
            best_metrics = dev
        if dev["der"] <= config.stop_when_dev_der:
            stopped_early = epoch < config.epochs
            break

    assert best_params is not None  # epochs >= 1 guarantees one record
    checkpoint = Checkpoint(
        params=best_params,
        vocab=vocab,
        tags=tags,
        inventory=inventory,
        config=config.to_dict(),
        seed=config.seed,
        epoch=best_epoch,
        dev_metrics=best_metrics,
    )
    return TrainResult(
        checkpoint=checkpoint,
        history=tuple(history),
        initial_loss=initial_loss,
        best_epoch=best_epoch,
        stopped_early=stopped_early,
    )


def write_train_log(path: str | Path, history: Sequence[EpochRecord]) -> None:
    """Line-delimited JSON progress log (one record per epoch)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in history:
            fh.write(json.dumps(record.to_json_dict(), sort_keys=True) + "\n")
