"""
Restoring accents with a trained model
======================================

Loads the checkpoint written by 04_train_tagger.py and places accent marks
on unaccented verses.  Restoration never alters base text: stripping the
output always returns the input.
"""

import sys
from pathlib import Path

from svaratag.synthetic import make_rule_corpus, rule_accents
from svaratag.tagger.restore import AccentRestorer
from svaratag.text import strip_accents

path = Path(__file__).parent / "output" / "rule_tagger.ckpt"
if not path.is_file():
    sys.exit("run demos/04_train_tagger.py first to produce the checkpoint")

restorer = AccentRestorer.from_file(str(path))

# Fresh verses the model never saw (different generator seed).
_, unseen = make_rule_corpus(n_train=6, n_test=6, seed=99)
for pair in unseen:
    restored = restorer.restore_verse(pair.unaccented)
    expected = rule_accents(pair.unaccented)
    status = "ok " if restored == expected else "MISS"
    print(f"{status} in:  {pair.unaccented}")
    print(f"     out: {restored}")
    assert strip_accents(restored) == pair.unaccented  # bases preserved

# decode_tags exposes the raw per-cluster decisions for inspection.
from svaratag.text import segment

tags = restorer.decode_tags(unseen[0].unaccented)
print()
print("per-cluster tags of the first verse:")
for cluster, tag in zip(segment(unseen[0].unaccented), tags):
    marks = ",".join(f"U+{cp:04X}" for cp in tag.codepoints) or "-"
    print(f"  {cluster.text!r:8} {marks}")
