"""
Parallel corpus construction and stratified splitting
=====================================================

Accented source verses become (unaccented, accented) training pairs with
provenance ids, then a seeded stratified split assigns every id to exactly
one of train/dev/test.
"""

from svaratag.corpus import build_pairs, stratified_split, validate_pair
from svaratag.synthetic import make_rule_corpus

# Synthetic accented verses stand in for a real corpus file here; `svaratag
# pair` does the same construction from JSONL or TSV sources.
train_seed, test_seed = make_rule_corpus(n_train=110, n_test=10, seed=2)
sources = [(p.provenance, p.accented) for p in train_seed + test_seed]
pairs = build_pairs(sources)
print(f"built {len(pairs)} pairs")

example = pairs[0]
print("id:        ", example.id)
print("accented:  ", example.accented)
print("unaccented:", example.unaccented)

# Every pair satisfies the strip invariant; validate_pair re-checks it along
# with normalization, stray marks, and provenance ranges.
report = validate_pair(example)
print("validation:", report)

# The split stratifies by (mandala, verse-length quartile) so each split sees
# the same mix of books and verse lengths.  Counts follow the ratios with
# largest-remainder rounding and are exact at the corpus level.
split = stratified_split(pairs, ratios=(0.85, 0.10, 0.05), seed=7)
n_train, n_dev, n_test = split.counts()
print(f"split sizes: train={n_train} dev={n_dev} test={n_test}")

ids = set(p.id for p in pairs)
assigned = set(split.train) | set(split.dev) | set(split.test)
assert assigned == ids
print("every id assigned exactly once:", len(split.train) + len(split.dev) + len(split.test) == len(ids))

# Same seed, same split: the manifest is reproducible.
again = stratified_split(pairs, ratios=(0.85, 0.10, 0.05), seed=7)
print("deterministic:", again == split)
