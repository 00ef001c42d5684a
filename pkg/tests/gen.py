"""Shared random generators for well-formed Devanagari accent text.

Generated strings are canonical: NFC, base combining marks before accent
marks, accents only on non-punctuation clusters.
"""

from __future__ import annotations

import random

from svaratag.text import DEFAULT_INVENTORY, normalize

CONSONANTS = [chr(c) for c in range(0x0915, 0x0939 + 1)]  # ka..ha
INDEPENDENT_VOWELS = [chr(c) for c in range(0x0905, 0x0914 + 1)]
VOWEL_SIGNS = [chr(c) for c in range(0x093E, 0x094C + 1)]
NASAL_MARKS = ["ँ", "ं", "ः"]  # candrabindu, anusvara, visarga
VIRAMA = "्"
ACCENTS = ["॑", "॒", "᳚", "᳐", "᳒", "᳡"]
DANDA, DOUBLE_DANDA = "।", "॥"

assert all(ord(a) in DEFAULT_INVENTORY for a in ACCENTS)


def random_cluster(rng: random.Random, accent_prob: float = 0.5) -> str:
    """One well-formed base cluster, optionally with 1-2 accent marks."""
    kind = rng.random()
    if kind < 0.15:
        base = rng.choice(INDEPENDENT_VOWELS)
    elif kind < 0.35:
        # conjunct: C + virama + C (+ optional vowel sign)
        base = rng.choice(CONSONANTS) + VIRAMA + rng.choice(CONSONANTS)
        if rng.random() < 0.5:
            base += rng.choice(VOWEL_SIGNS)
    else:
        base = rng.choice(CONSONANTS)
        if rng.random() < 0.6:
            base += rng.choice(VOWEL_SIGNS)
    if rng.random() < 0.25:
        base += rng.choice(NASAL_MARKS)
    accents = ""
    if rng.random() < accent_prob:
        marks = rng.sample(ACCENTS, k=1 if rng.random() < 0.8 else 2)
        # ascending codepoint order; NFC then yields the canonical rendering
        accents = "".join(sorted(marks))
    return base + accents


def random_word(rng: random.Random, accent_prob: float = 0.5) -> str:
    return "".join(random_cluster(rng, accent_prob) for _ in range(rng.randint(1, 4)))


def random_verse(rng: random.Random, accent_prob: float = 0.5) -> str:
    """A verse: words separated by spaces, with optional internal danda and
    a closing danda, NFC-normalized."""
    words = [random_word(rng, accent_prob) for _ in range(rng.randint(1, 8))]
    if len(words) > 2 and rng.random() < 0.6:
        words.insert(rng.randint(1, len(words) - 1), DANDA)
    tail = rng.choice(["", " " + DANDA, " " + DOUBLE_DANDA])
    return normalize(" ".join(words) + tail)
