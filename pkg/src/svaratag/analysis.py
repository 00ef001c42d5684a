"""Error taxonomy over aligned verses plus cross-metric correlations.

Categories: a deleted mark and an inserted copy of the same mark within a
small cluster window pair up as one misplacement; a misplacement whose two
positions straddle whitespace or a danda is a boundary error; leftover
deletions are omissions, leftover insertions overgenerations; positions
where both tags are non-empty but unequal are type confusions. Verses whose
base graphemes diverge are not categorized; their accent errors are counted
as unclassified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ContractError
from .metrics import CorrelationResult, MetricsReport, corpus_report, der, pearson
from .text import DEFAULT_INVENTORY, AccentTag, GraphemeCluster, normalize, segment

CATEGORIES = ("misplacement", "boundary", "omission", "overgeneration", "type_confusion")

#: Pairing window in clusters; approximates a one-mora shift.
DEFAULT_WINDOW = 2


@dataclass(frozen=True)
class ClassifiedError:
    """One categorized accent error at cluster granularity."""

    verse_id: str
    category: str
    ref_position: int | None
    hyp_position: int | None
    ref_tag: AccentTag
    hyp_tag: AccentTag
    distance: int = 0

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ContractError(f"unknown category {self.category!r}")
        if self.category in ("misplacement", "boundary"):
            if self.ref_position is None or self.hyp_position is None or self.distance < 1:
                raise ContractError(f"{self.category} requires two positions and distance >= 1")
        elif self.category == "omission":
            if self.ref_position is None or self.hyp_position is not None:
                raise ContractError("omission carries only a reference position")
        elif self.category == "overgeneration":
            if self.hyp_position is None or self.ref_position is not None:
                raise ContractError("overgeneration carries only a hypothesis position")
        else:  # type_confusion
            if (
                self.ref_position is None
                or self.ref_position != self.hyp_position
                or self.ref_tag.is_empty
                or self.hyp_tag.is_empty
                or self.ref_tag == self.hyp_tag
            ):
                raise ContractError(
                    "type_confusion requires one shared position and two distinct non-empty tags"
                )

    def to_json_dict(self) -> dict:
        return {
            "verseId": self.verse_id,
            "category": self.category,
            "refPosition": self.ref_position,
            "hypPosition": self.hyp_position,
            "refTag": [f"{cp:04X}" for cp in self.ref_tag.codepoints],
            "hypTag": [f"{cp:04X}" for cp in self.hyp_tag.codepoints],
            "distance": self.distance,
        }


@dataclass(frozen=True)
class VerseClassification:
    """classify_errors output for one verse.

    ``diff_positions`` is the raw per-position difference count; for a
    divergent-base verse it equals ``unclassified`` by definition, so the
    conservation identity holds corpus-wide:
    2*(misplacement+boundary) + omission + overgeneration + type_confusion
    + unclassified == diff_positions.
    """

    verse_id: str
    errors: tuple[ClassifiedError, ...]
    unclassified: int
    diff_positions: int


@dataclass(frozen=True)
class ErrorDistribution:
    """Counts and percentage shares over classified errors."""

    counts: Mapping[str, int]
    shares: Mapping[str, float]
    total: int

    def to_json_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "shares": dict(self.shares),
            "total": self.total,
        }


def _pair_moves(
    deletions: list[tuple[int, AccentTag]],
    insertions: list[tuple[int, AccentTag]],
    window: int,
) -> tuple[list[tuple[int, int, AccentTag]], list[int], list[int]]:
    """Greedy nearest-first pairing of same-tag deletions and insertions.

    Ties on distance break toward the pair whose leftmost position is
    smallest, then by deletion position, then insertion position.
    """
    candidates = []
    for di, (dpos, dtag) in enumerate(deletions):
        for ii, (ipos, itag) in enumerate(insertions):
            dist = abs(dpos - ipos)
            if dtag == itag and 1 <= dist <= window:
                candidates.append((dist, min(dpos, ipos), dpos, ipos, di, ii))
    candidates.sort()
    used_d: set[int] = set()
    used_i: set[int] = set()
    pairs: list[tuple[int, int, AccentTag]] = []
    for _, _, dpos, ipos, di, ii in candidates:
        if di in used_d or ii in used_i:
            continue
        used_d.add(di)
        used_i.add(ii)
        pairs.append((dpos, ipos, deletions[di][1]))
    rest_d = [i for i in range(len(deletions)) if i not in used_d]
    rest_i = [i for i in range(len(insertions)) if i not in used_i]
    return pairs, rest_d, rest_i


def _straddles_punct(clusters: Sequence[GraphemeCluster], a: int, b: int) -> bool:
    lo, hi = (a, b) if a < b else (b, a)
    return any(clusters[k].is_punct for k in range(lo + 1, hi))


def classify_errors(
    ref_accented: str,
    hyp_accented: str,
    window: int = DEFAULT_WINDOW,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
    verse_id: str = "",
) -> VerseClassification:
    """Categorize the accent differences between two renderings of a verse."""
    if window < 1:
        raise ContractError(f"window must be at least 1, got {window}")
    ref_clusters = segment(normalize(ref_accented), inventory=inventory, strict=False)
    hyp_clusters = segment(normalize(hyp_accented), inventory=inventory, strict=False)
    ref_bases = [c.base for c in ref_clusters]
    hyp_bases = [c.base for c in hyp_clusters]
    if ref_bases != hyp_bases:
        report = der(ref_accented, hyp_accented, inventory=inventory)
        n = report.accent_errors
        return VerseClassification(verse_id, (), unclassified=n, diff_positions=n)

    ref_tags = [c.tag() for c in ref_clusters]
    hyp_tags = [c.tag() for c in hyp_clusters]
    deletions: list[tuple[int, AccentTag]] = []
    insertions: list[tuple[int, AccentTag]] = []
    confusions: list[int] = []
    diff_positions = 0
    for i, (rt, ht) in enumerate(zip(ref_tags, hyp_tags)):
        if rt == ht:
            continue
        diff_positions += 1
        if ht.is_empty:
            deletions.append((i, rt))
        elif rt.is_empty:
            insertions.append((i, ht))
        else:
            confusions.append(i)

    pairs, rest_d, rest_i = _pair_moves(deletions, insertions, window)
    errors: list[ClassifiedError] = []
    for dpos, ipos, tag in pairs:
        category = "boundary" if _straddles_punct(ref_clusters, dpos, ipos) else "misplacement"
        errors.append(
            ClassifiedError(
                verse_id, category, dpos, ipos, tag, tag, distance=abs(dpos - ipos)
            )
        )
    for i in rest_d:
        pos, tag = deletions[i]
        errors.append(ClassifiedError(verse_id, "omission", pos, None, tag, AccentTag(())))
    for i in rest_i:
        pos, tag = insertions[i]
        errors.append(ClassifiedError(verse_id, "overgeneration", None, pos, AccentTag(()), tag))
    for pos in confusions:
        errors.append(
            ClassifiedError(verse_id, "type_confusion", pos, pos, ref_tags[pos], hyp_tags[pos])
        )
    errors.sort(
        key=lambda e: (
            e.ref_position if e.ref_position is not None else e.hyp_position,
            CATEGORIES.index(e.category),
        )
    )
    return VerseClassification(verse_id, tuple(errors), unclassified=0, diff_positions=diff_positions)


def aggregate(errors: Sequence[ClassifiedError]) -> ErrorDistribution:
    """Counts and percentage shares per category over classified errors."""
    counts = {c: 0 for c in CATEGORIES}
    for e in errors:
        counts[e.category] += 1
    total = len(errors)
    shares = {c: (100.0 * n / total if total else 0.0) for c, n in counts.items()}
    return ErrorDistribution(counts=counts, shares=shares, total=total)


def metric_correlation(report: MetricsReport) -> dict[str, CorrelationResult]:
    """Pearson r between per-verse DER and CER, and DER and WER."""
    if len(report.per_verse) < 2:
        raise ContractError("correlation needs at least 2 verses")
    ders = [v.der.rate for v in report.per_verse]
    cers = [v.cer.rate for v in report.per_verse]
    wers = [v.wer.rate for v in report.per_verse]
    return {"derCer": pearson(ders, cers), "derWer": pearson(ders, wers)}


@dataclass(frozen=True)
class CorpusAnalysis:
    """`analyze` payload: distribution, unclassified, correlations, errors."""

    distribution: ErrorDistribution
    unclassified: int
    diff_positions: int
    errors: tuple[ClassifiedError, ...]
    correlations: dict[str, CorrelationResult]
    metrics: MetricsReport

    def to_json_dict(self) -> dict:
        return {
            "distribution": self.distribution.to_json_dict(),
            "unclassified": self.unclassified,
            "diffPositions": self.diff_positions,
            "correlations": {
                name: {"r": r.r, "n": r.n, "defined": r.defined, "flags": list(r.flags)}
                for name, r in self.correlations.items()
            },
            "errors": [e.to_json_dict() for e in self.errors],
            "metrics": self.metrics.to_json_dict(),
        }


def analyze_corpus(
    refs: Sequence[tuple[str, str]],
    hyps: Sequence[tuple[str, str]],
    window: int = DEFAULT_WINDOW,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> CorpusAnalysis:
    """Classify every verse and correlate per-verse metrics (needs >= 2)."""
    report = corpus_report(refs, hyps, inventory=inventory)
    errors: list[ClassifiedError] = []
    unclassified = 0
    diff_positions = 0
    for (rid, ref), (_, hyp) in zip(refs, hyps):
        vc = classify_errors(ref, hyp, window=window, inventory=inventory, verse_id=rid)
        errors.extend(vc.errors)
        unclassified += vc.unclassified
        diff_positions += vc.diff_positions
    correlations = metric_correlation(report)
    return CorpusAnalysis(
        distribution=aggregate(errors),
        unclassified=unclassified,
        diff_positions=diff_positions,
        errors=tuple(errors),
        correlations=correlations,
        metrics=report,
    )


def distribution_table(analysis: CorpusAnalysis) -> str:
    """Small fixed-width table for terminal output."""
    lines = [f"{'category':<16}{'count':>7}{'share':>9}"]
    for c in CATEGORIES:
        lines.append(
            f"{c:<16}{analysis.distribution.counts[c]:>7}"
            f"{analysis.distribution.shares[c]:>8.1f}%"
        )
    lines.append(f"{'unclassified':<16}{analysis.unclassified:>7}")
    return "\n".join(lines)
