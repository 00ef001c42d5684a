"""
Accent-aware evaluation: WER, CER, DER
======================================

WER and CER are plain edit-distance rates over words and characters.  DER
compares only the accent marks, cluster by cluster, normalized by the number
of reference diacritics, so a single shifted mark costs two errors against
one reference mark and the rate can exceed 1.
"""

from svaratag.metrics import cer, corpus_report, der, levenshtein_align, wer

ref = "अ॒ग्निमी॑ळे पु॒रोहि॑तम्"
hyp_shift = "अग्निमी॑ळे पुरोहित॒म्"  # one mark dropped, one moved

print("ref:", ref)
print("hyp:", hyp_shift)
print()

print("WER:", wer(ref, hyp_shift).rate)
print("CER:", round(cer(ref, hyp_shift).rate, 4))

rep = der(ref, hyp_shift)
print(f"DER: {rep.rate:.4f}  ({rep.accent_errors} accent errors / {rep.ref_diacritics} reference marks)")
print()

# The worked examples from the definition:
print("identity DER:      ", der(ref, ref).rate)
print("shifted-mark DER:  ", der("क॒त", "कत॒").rate, "(one mark, two errors)")
print("one-of-two omitted:", der("क॒त॑", "क॒त").rate)
print()

# The shared alignment core exposes the edit operations themselves.
alignment = levenshtein_align(list("abc"), list("axc"))
print("alignment ops:", [(op.kind, op.ref_index, op.hyp_index) for op in alignment.ops])
print("alignment cost:", alignment.cost)
print()

# Corpus-level rates pool counts over verses (micro average), so long verses
# weigh more than short ones.
refs = [("1.1.1", ref), ("1.1.2", "स होता॑")]
hyps = [("1.1.1", hyp_shift), ("1.1.2", "स होता॑")]
report = corpus_report(refs, hyps)
print(f"corpus: WER {report.wer:.4f}  CER {report.cer:.4f}  DER {report.der:.4f}")
