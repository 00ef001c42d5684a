"""WER, CER, and diacritic error rate (DER) with exact edit-distance alignment.

All three metrics share one Levenshtein core with a deterministic backtrace.
WER tokenizes on Unicode whitespace (dandas count as tokens when whitespace
separated); CER runs over Unicode scalar values with whitespace removed; DER
isolates accent-mark errors, aligning base grapheme sequences first so it
stays total even when a hypothesis mangles base characters.

Corpus aggregation is micro-averaged: total errors over total reference
units, never the mean of per-verse rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ContractError
from .text import DEFAULT_INVENTORY, AccentTag, segment

ZERO_REF_FLAG = "zero-reference-units"
ZERO_REF_DIACRITICS_FLAG = "zero-reference-diacritics"
CONSTANT_INPUT_FLAG = "undefined-correlation-constant-input"

#: Recorded in report headers so downstream consumers know the policy.
TOKENIZATION_POLICY = "unicode-whitespace; dandas are tokens when whitespace-separated"
SHIFT_POLICY = "a shifted mark counts as deletion + insertion (two errors)"


@dataclass(frozen=True)
class EditOp:
    """One alignment step; indices are None on the side an op does not touch."""

    kind: str  # match | substitute | delete | insert
    ref_index: int | None
    hyp_index: int | None


@dataclass(frozen=True)
class Alignment:
    ops: tuple[EditOp, ...]
    cost: int

    @property
    def substitutions(self) -> int:
        return sum(1 for op in self.ops if op.kind == "substitute")

    @property
    def deletions(self) -> int:
        return sum(1 for op in self.ops if op.kind == "delete")

    @property
    def insertions(self) -> int:
        return sum(1 for op in self.ops if op.kind == "insert")

    @property
    def matches(self) -> int:
        return sum(1 for op in self.ops if op.kind == "match")


def levenshtein_align(
    ref: Sequence,
    hyp: Sequence,
    equality: Callable[[object, object], bool] = lambda a, b: a == b,
) -> Alignment:
    """Minimal unit-cost alignment of ``ref`` to ``hyp``.

    Backtrace tie-break prefers match > substitute > delete > insert, so the
    returned op sequence is deterministic.
    """
    n, m = len(ref), len(hyp)
    # dp[i][j] = distance between ref[:i] and hyp[:j]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        row = dp[i]
        prev = dp[i - 1]
        r = ref[i - 1]
        for j in range(1, m + 1):
            same = equality(r, hyp[j - 1])
            best = prev[j - 1] + (0 if same else 1)
            dele = prev[j] + 1
            if dele < best:
                best = dele
            ins = row[j - 1] + 1
            if ins < best:
                best = ins
            row[j] = best
    ops: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and equality(ref[i - 1], hyp[j - 1]) and dp[i][j] == dp[i - 1][j - 1]:
            ops.append(EditOp("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + 1:
            ops.append(EditOp("substitute", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            ops.append(EditOp("delete", i - 1, None))
            i -= 1
        else:
            ops.append(EditOp("insert", None, j - 1))
            j -= 1
    ops.reverse()
    return Alignment(ops=tuple(ops), cost=dp[n][m])


@dataclass(frozen=True)
class RateReport:
    """One metric on one verse pair: rate plus its raw counts."""

    rate: float
    substitutions: int
    deletions: int
    insertions: int
    n_ref: int
    flags: tuple[str, ...] = ()

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def _rate_from_alignment(alignment: Alignment, n_ref: int) -> RateReport:
    errors = alignment.cost
    if n_ref > 0:
        return RateReport(
            rate=errors / n_ref,
            substitutions=alignment.substitutions,
            deletions=alignment.deletions,
            insertions=alignment.insertions,
            n_ref=n_ref,
        )
    if errors == 0:
        return RateReport(0.0, 0, 0, 0, 0)
    return RateReport(
        rate=float(errors),  # errors / 1 by convention
        substitutions=alignment.substitutions,
        deletions=alignment.deletions,
        insertions=alignment.insertions,
        n_ref=0,
        flags=(ZERO_REF_FLAG,),
    )


def wer(ref: str, hyp: str) -> RateReport:
    """Word error rate over Unicode-whitespace tokens."""
    ref_tokens = ref.split()
    hyp_tokens = hyp.split()
    return _rate_from_alignment(levenshtein_align(ref_tokens, hyp_tokens), len(ref_tokens))


def cer(ref: str, hyp: str) -> RateReport:
    """Character error rate over Unicode scalars, whitespace excluded."""
    ref_chars = [c for c in ref if not c.isspace()]
    hyp_chars = [c for c in hyp if not c.isspace()]
    return _rate_from_alignment(levenshtein_align(ref_chars, hyp_chars), len(ref_chars))


@dataclass(frozen=True)
class PositionDiff:
    """An aligned cluster pair (or one-sided cluster) whose tags differ."""

    ref_index: int | None
    hyp_index: int | None
    ref_tag: AccentTag
    hyp_tag: AccentTag
    errors: int  # edit distance between the two ordered mark sequences
    bases_diverged: bool = False


@dataclass(frozen=True)
class DerReport:
    rate: float
    accent_errors: int
    ref_diacritics: int
    per_position: tuple[PositionDiff, ...]
    bases_aligned: bool  # True when base sequences were equal
    flags: tuple[str, ...] = ()


def der(ref: str, hyp: str, inventory: frozenset[int] = DEFAULT_INVENTORY) -> DerReport:
    """Diacritic error rate: accent-mark errors over reference diacritic count.

    Base grapheme sequences are compared first; when they diverge the two
    cluster sequences are Levenshtein-aligned on base text and accent errors
    are counted per aligned pair (edit distance between ordered mark
    sequences), plus all marks on deleted/inserted clusters.  May exceed 1.
    """
    ref_clusters = segment(ref, inventory=inventory, strict=False)
    hyp_clusters = segment(hyp, inventory=inventory, strict=False)
    ref_bases = [c.base for c in ref_clusters]
    hyp_bases = [c.base for c in hyp_clusters]
    ref_diacritics = sum(len(c.accents) for c in ref_clusters)

    bases_aligned = ref_bases == hyp_bases
    if bases_aligned:
        ops = [EditOp("match", k, k) for k in range(len(ref_bases))]
    else:
        ops = list(levenshtein_align(ref_bases, hyp_bases).ops)

    errors = 0
    diffs: list[PositionDiff] = []
    for op in ops:
        if op.kind in ("match", "substitute"):
            rc = ref_clusters[op.ref_index]
            hc = hyp_clusters[op.hyp_index]
            if rc.accents == hc.accents:
                continue
            pair_errors = levenshtein_align(rc.accents, hc.accents).cost
            errors += pair_errors
            diffs.append(
                PositionDiff(
                    ref_index=op.ref_index,
                    hyp_index=op.hyp_index,
                    ref_tag=AccentTag(rc.accents),
                    hyp_tag=AccentTag(hc.accents),
                    errors=pair_errors,
                    bases_diverged=op.kind == "substitute",
                )
            )
        elif op.kind == "delete":
            rc = ref_clusters[op.ref_index]
            if rc.accents:
                errors += len(rc.accents)
                diffs.append(
                    PositionDiff(
                        ref_index=op.ref_index,
                        hyp_index=None,
                        ref_tag=AccentTag(rc.accents),
                        hyp_tag=AccentTag(()),
                        errors=len(rc.accents),
                        bases_diverged=True,
                    )
                )
        else:  # insert
            hc = hyp_clusters[op.hyp_index]
            if hc.accents:
                errors += len(hc.accents)
                diffs.append(
                    PositionDiff(
                        ref_index=None,
                        hyp_index=op.hyp_index,
                        ref_tag=AccentTag(()),
                        hyp_tag=AccentTag(hc.accents),
                        errors=len(hc.accents),
                        bases_diverged=True,
                    )
                )

    if ref_diacritics > 0:
        rate, flags = errors / ref_diacritics, ()
    elif errors == 0:
        rate, flags = 0.0, ()
    else:
        rate, flags = float(errors), (ZERO_REF_DIACRITICS_FLAG,)
    return DerReport(
        rate=rate,
        accent_errors=errors,
        ref_diacritics=ref_diacritics,
        per_position=tuple(diffs),
        bases_aligned=bases_aligned,
        flags=flags,
    )


@dataclass(frozen=True)
class VerseMetrics:
    verse_id: str
    wer: RateReport
    cer: RateReport
    der: DerReport


@dataclass(frozen=True)
class MetricsReport:
    """Corpus-level micro-averaged metrics plus the per-verse vectors."""

    wer: float
    cer: float
    der: float
    counts: dict[str, dict[str, int]]
    flags: tuple[str, ...]
    per_verse: tuple[VerseMetrics, ...]
    tokenization: str = TOKENIZATION_POLICY
    shift_policy: str = SHIFT_POLICY

    def to_json_dict(self) -> dict:
        return {
            "wer": self.wer,
            "cer": self.cer,
            "der": self.der,
            "counts": self.counts,
            "flags": list(self.flags),
            "tokenization": self.tokenization,
            "shiftPolicy": self.shift_policy,
            "perVerse": [
                {
                    "id": v.verse_id,
                    "wer": v.wer.rate,
                    "cer": v.cer.rate,
                    "der": v.der.rate,
                    "werCounts": [v.wer.substitutions, v.wer.deletions, v.wer.insertions, v.wer.n_ref],
                    "cerCounts": [v.cer.substitutions, v.cer.deletions, v.cer.insertions, v.cer.n_ref],
                    "derCounts": [v.der.accent_errors, v.der.ref_diacritics],
                }
                for v in self.per_verse
            ],
        }


def corpus_report(
    refs: Sequence[tuple[str, str]],
    hyps: Sequence[tuple[str, str]],
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> MetricsReport:
    """Micro-averaged corpus metrics over (id, text) lists matched by id.

    Raises :class:`ContractError` on length or id mismatch.
    """
    if len(refs) != len(hyps):
        raise ContractError(f"reference count {len(refs)} != hypothesis count {len(hyps)}")
    per_verse: list[VerseMetrics] = []
    flags: list[str] = []
    tot = {
        "wer": {"errors": 0, "n_ref": 0},
        "cer": {"errors": 0, "n_ref": 0},
        "der": {"errors": 0, "n_ref": 0},
    }
    counts: dict[str, dict[str, int]] = {
        "wer": {"S": 0, "D": 0, "I": 0, "N_ref": 0},
        "cer": {"S": 0, "D": 0, "I": 0, "N_ref": 0},
        "der": {"errors": 0, "refDiacritics": 0},
    }
    for (rid, ref), (hid, hyp) in zip(refs, hyps):
        if rid != hid:
            raise ContractError(f"id mismatch: reference {rid!r} vs hypothesis {hid!r}")
        w, c, d = wer(ref, hyp), cer(ref, hyp), der(ref, hyp, inventory=inventory)
        per_verse.append(VerseMetrics(rid, w, c, d))
        for name, rep in (("wer", w), ("cer", c)):
            tot[name]["errors"] += rep.errors
            tot[name]["n_ref"] += rep.n_ref
            counts[name]["S"] += rep.substitutions
            counts[name]["D"] += rep.deletions
            counts[name]["I"] += rep.insertions
            counts[name]["N_ref"] += rep.n_ref
            for f in rep.flags:
                if f not in flags:
                    flags.append(f)
        tot["der"]["errors"] += d.accent_errors
        tot["der"]["n_ref"] += d.ref_diacritics
        counts["der"]["errors"] += d.accent_errors
        counts["der"]["refDiacritics"] += d.ref_diacritics
        for f in d.flags:
            if f not in flags:
                flags.append(f)

    def micro(name: str) -> float:
        e, n = tot[name]["errors"], tot[name]["n_ref"]
        if n > 0:
            return e / n
        return 0.0 if e == 0 else float(e)

    for name in tot:
        if tot[name]["n_ref"] == 0 and tot[name]["errors"] > 0 and ZERO_REF_FLAG not in flags:
            flags.append(ZERO_REF_FLAG)
    return MetricsReport(
        wer=micro("wer"),
        cer=micro("cer"),
        der=micro("der"),
        counts=counts,
        flags=tuple(flags),
        per_verse=tuple(per_verse),
    )


@dataclass(frozen=True)
class CorrelationResult:
    r: float  # NaN when undefined
    n: int
    flags: tuple[str, ...] = ()

    @property
    def defined(self) -> bool:
        return CONSTANT_INPUT_FLAG not in self.flags


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Pearson correlation; constant input yields a flagged NaN, not a crash."""
    if len(xs) != len(ys):
        raise ContractError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ContractError("pearson needs at least 2 points")
    import numpy as np

    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt((xc * xc).sum()))
    sy = float(np.sqrt((yc * yc).sum()))
    if sx == 0.0 or sy == 0.0:
        return CorrelationResult(float("nan"), len(xs), (CONSTANT_INPUT_FLAG,))
    r = float((xc * yc).sum() / (sx * sy))
    r = max(-1.0, min(1.0, r))
    return CorrelationResult(r, len(xs))
