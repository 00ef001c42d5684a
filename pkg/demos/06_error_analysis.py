"""
Error taxonomy for accent mistakes
==================================

Raw DER counts every differing position.  The analysis layer explains those
positions: a deleted and a nearby inserted identical mark pair up as one
misplacement; a pair straddling a word or verse boundary is a boundary
error; leftovers are omissions, overgenerations, or mark-type confusions.
The category counts always reconstruct the raw diff-position total.
"""

from svaratag.analysis import aggregate, analyze_corpus, classify_errors, distribution_table

AN, SV = "॒", "॑"

cases = [
    ("omission", "क" + AN + "ख", "कख"),
    ("overgeneration", "कख", "क" + AN + "ख"),
    ("type confusion", "क" + AN + "ख", "क" + SV + "ख"),
    ("misplacement (shift by 1)", "क" + AN + "ख ग", "कख" + AN + " ग"),
    ("boundary (across a space)", "क" + AN + " ख", "क ख" + AN),
]

for name, ref, hyp in cases:
    result = classify_errors(ref, hyp, window=2)
    labels = [e.category for e in result.errors]
    print(f"{name:28} -> {labels}")
print()

# On a corpus the per-verse classifications pool into a distribution with
# shares in percent, plus DER-CER and DER-WER correlations across verses.
refs, hyps = [], []
for i, (name, ref, hyp) in enumerate(cases * 4):
    vid = f"1.1.{i + 1}"
    refs.append((vid, ref))
    hyps.append((vid, hyp))

analysis = analyze_corpus(refs, hyps, window=2)
print(distribution_table(analysis))
print()
counts = analysis.distribution.counts
conserved = (
    2 * (counts["misplacement"] + counts["boundary"])
    + counts["omission"]
    + counts["overgeneration"]
    + counts["type_confusion"]
    + analysis.unclassified
)
print("diff positions:", analysis.diff_positions, " reconstructed:", conserved)
print("correlations:", {k: round(v.r, 4) for k, v in analysis.correlations.items()})
