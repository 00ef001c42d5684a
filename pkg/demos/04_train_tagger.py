"""
Training the BiLSTM-CRF accent tagger
=====================================

The tagger learns accent placement as per-cluster sequence labeling.  This
demo fits it on a small rule-generated corpus whose accent pattern is fully
learnable, so dev DER falls quickly; the checkpoint lands in
demos/output/rule_tagger.ckpt for the restoration demo to load.

Runtime is a couple of minutes single-threaded: the network uses the full
production dimensions (256-d embeddings, two 512-unit BiLSTM layers).
"""

from pathlib import Path

from svaratag.synthetic import make_rule_corpus
from svaratag.tagger.checkpoint import save_checkpoint
from svaratag.tagger.train import TrainConfig, train

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# The rule corpus marks anudatta after every danda and svarita on each
# verse-final cluster; 120 training and 30 held-out verses.
train_pairs, dev_pairs = make_rule_corpus(n_train=120, n_test=30, seed=12)
print(f"{len(train_pairs)} train / {len(dev_pairs)} dev verses")
print("sample:", train_pairs[0].accented)
print()

# Early stopping on dev DER 0 ends the run once the rule is learned.
config = TrainConfig(epochs=12, batch_size=32, seed=0)
result = train(config, train_pairs, dev_pairs)

print()
print(f"initial loss {result.initial_loss:.4f}")
for rec in result.history:
    print(
        f"epoch {rec.epoch:2d}  loss {rec.train_loss:8.4f}  "
        f"dev WER {rec.dev_wer:.4f}  CER {rec.dev_cer:.4f}  DER {rec.dev_der:.4f}"
    )
print(f"best epoch {result.best_epoch}, stopped early: {result.stopped_early}")

ckpt = result.checkpoint
path = OUT / "rule_tagger.ckpt"
save_checkpoint(
    str(path),
    ckpt.params,
    ckpt.vocab,
    ckpt.tags,
    ckpt.inventory,
    ckpt.config,
    ckpt.seed,
    ckpt.epoch,
    ckpt.dev_metrics,
)
print(f"saved {path} (dev DER {ckpt.dev_metrics['der']:.4f})")
