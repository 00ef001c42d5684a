"""Deterministic rule-generated corpus for end-to-end exercises.

The accent rule is positional and content-free, so a sequence model can in
principle learn it exactly:

* anudatta on the first non-punctuation cluster after every danda;
* svarita on the verse's last non-punctuation cluster.

When both land on the same cluster the tag carries both marks. Danda and
whitespace clusters never carry marks.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Provenance, VersePair, build_pairs
from .errors import ContractError
from .text import (
    ANUDATTA,
    DEFAULT_INVENTORY,
    SVARITA,
    AccentTag,
    apply_labels,
    normalize,
    segment,
)

#: 24 single-consonant base clusters (KA..BHA).
ALPHABET: tuple[str, ...] = tuple(chr(cp) for cp in range(0x0915, 0x0915 + 24))

DANDA_CH = "।"
DOUBLE_DANDA_CH = "॥"


def rule_labels(unaccented: str, inventory: frozenset[int] = DEFAULT_INVENTORY) -> tuple[AccentTag, ...]:
    """Per-cluster tags the rule assigns to an unaccented verse."""
    clusters = segment(normalize(unaccented), inventory=inventory, strict=True)
    marks: list[set[int]] = [set() for _ in clusters]
    pending = False
    last_content = -1
    for i, c in enumerate(clusters):
        if c.is_danda:
            pending = True
        elif not c.is_whitespace:
            if pending:
                marks[i].add(ANUDATTA)
                pending = False
            last_content = i
    if last_content >= 0:
        marks[last_content].add(SVARITA)
    return tuple(AccentTag(tuple(sorted(m))) for m in marks)


def rule_accents(unaccented: str, inventory: frozenset[int] = DEFAULT_INVENTORY) -> str:
    """Apply the rule to an unaccented verse."""
    return apply_labels(normalize(unaccented), rule_labels(unaccented, inventory), inventory)


def _random_verse(rng: np.random.Generator) -> str:
    """Unaccented verse: 2-3 danda-separated segments of two short words."""
    segments: list[str] = []
    for _ in range(int(rng.integers(2, 4))):
        words = []
        for _ in range(2):
            n = int(rng.integers(1, 3))
            words.append("".join(ALPHABET[int(k)] for k in rng.integers(0, len(ALPHABET), n)))
        segments.append(" ".join(words))
    verse = f" {DANDA_CH} ".join(segments)
    if rng.random() < 0.5:
        verse += f" {DOUBLE_DANDA_CH}"
    return verse


def make_rule_corpus(
    n_train: int = 200,
    n_test: int = 50,
    seed: int = 0,
) -> tuple[list[VersePair], list[VersePair]]:
    """Accented train/test pairs generated by the rule; ids are unique.

    Unaccented verse strings are unique across the whole corpus so the test
    half is genuinely unseen text.
    """
    if n_train < 1 or n_test < 1:
        raise ContractError("corpus halves must be non-empty")
    rng = np.random.default_rng(seed)
    seen: set[str] = set()
    records: list[tuple[Provenance, str]] = []
    i = 0
    while len(records) < n_train + n_test:
        verse = _random_verse(rng)
        if verse in seen:
            continue
        seen.add(verse)
        prov = Provenance(mandala=(i % 10) + 1, sukta=i // 10 + 1, rc=1)
        records.append((prov, rule_accents(verse)))
        i += 1
    pairs = build_pairs(records)
    return pairs[:n_train], pairs[n_train:]


def rule_agreement(restored: Sequence[str], unaccented: Sequence[str]) -> float:
    """Fraction of rule-assigned marks reproduced exactly, over all verses."""
    total = 0
    agree = 0
    for hyp, plain in zip(restored, unaccented):
        want = rule_labels(plain)
        got = tuple(c.tag() for c in segment(normalize(hyp), strict=True))
        if len(want) != len(got):
            raise ContractError("restored verse changed the cluster count")
        for w, g in zip(want, got):
            if w.is_empty:
                continue
            total += 1
            if w == g:
                agree += 1
    return agree / total if total else 1.0
