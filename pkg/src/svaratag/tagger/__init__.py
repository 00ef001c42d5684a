"""BiLSTM-CRF accent tagger: model, training, checkpoints, restoration."""

from .adam import AdamState, adam_step, clip_global_norm, global_norm
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .crf import CrfTransitions, crf_log_likelihood, log_partition, path_score, viterbi
from .model import batch_loss_and_grads, decode
from .network import (
    EMBED_DIM,
    HIDDEN,
    LAYERS,
    TaggerParams,
    emissions,
    init_params,
    make_dropout_mask,
)
from .restore import AccentRestorer
from .train import EpochRecord, TrainConfig, TrainResult, train, write_train_log
from .vocab import PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN, TagSet, Vocab, build_vocab_and_tags

__all__ = [
    "AdamState",
    "adam_step",
    "clip_global_norm",
    "global_norm",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "CrfTransitions",
    "crf_log_likelihood",
    "log_partition",
    "path_score",
    "viterbi",
    "batch_loss_and_grads",
    "decode",
    "EMBED_DIM",
    "HIDDEN",
    "LAYERS",
    "TaggerParams",
    "emissions",
    "init_params",
    "make_dropout_mask",
    "AccentRestorer",
    "EpochRecord",
    "TrainConfig",
    "TrainResult",
    "train",
    "write_train_log",
    "PAD_ID",
    "PAD_TOKEN",
    "UNK_ID",
    "UNK_TOKEN",
    "TagSet",
    "Vocab",
    "build_vocab_and_tags",
]
