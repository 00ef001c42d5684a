"""
Reversible accent handling on Devanagari text
=============================================

A verse is split into grapheme clusters; each cluster's accent marks are
lifted off into a label sequence; applying the labels to the stripped text
reconstructs the original verse exactly.
"""

from svaratag import apply_labels, extract_labels, normalize, segment, strip_accents

# An accented line in the style of RV 1.1.1 (anudatta and svarita marks).
verse = normalize("अ॒ग्निमी॑ळे पु॒रोहि॑तं य॒ज्ञस्य॑ दे॒वमृ॒त्विज॑म् ।")
print("verse:     ", verse)

# Clusters group a base character with its combining marks.  Conjuncts
# (virama sequences) stay in one cluster, so accents land on whole aksharas.
clusters = segment(verse)
print("clusters:  ", " | ".join(c.text for c in clusters))

# strip_accents removes only inventory marks; everything else is untouched.
bare = strip_accents(verse)
print("stripped:  ", bare)

# extract_labels returns the stripped text plus one accent tag per cluster.
unaccented, labels = extract_labels(verse)
assert unaccented == bare
marked = [(c.text, tag) for c, tag in zip(segment(unaccented), labels) if tag.marks]
print("marked clusters:", [(t, [f"U+{cp:04X}" for cp in tag.codepoints]) for t, tag in marked])

# The round trip is exact: the original NFC verse comes back byte for byte.
restored = apply_labels(unaccented, labels)
assert restored == verse
print("round trip exact:", restored == verse)
