"""Unicode-safe handling of Vedic accent marks in Devanagari text.

Accented text is treated as a sequence of grapheme clusters: a base (an
initial character plus its non-accent combining marks, with virama-joined
conjuncts kept together) followed by zero or more accent marks drawn from a
configurable inventory.  Whitespace and danda punctuation form their own
single-codepoint clusters and never carry accents.

All operations assume NFC input; ``normalize`` is the entry point that
establishes that form.  NFC orders combining marks by canonical combining
class (U+0952, ccc 220, sorts before U+0951, ccc 230) but never reorders
across a ccc 0 mark, so a well-formed cluster is required to carry all of
its non-accent combining marks before its accent marks; the accent-first
order is rejected as a structural error in strict mode.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ContractError, StructuralTextError

logger = logging.getLogger(__name__)

#: U+0951 carries Unicode name "stress sign udatta" but writes the svarita
#: tone in Rigvedic convention (udatta itself is unmarked); U+0952 writes
#: anudatta below the character.
SVARITA = 0x0951
ANUDATTA = 0x0952

#: The Vedic Extensions block, U+1CD0..U+1CFF inclusive.
VEDIC_EXTENSIONS = range(0x1CD0, 0x1D00)

#: Default accent inventory: the two Devanagari svara marks plus the whole
#: Vedic Extensions block.
DEFAULT_INVENTORY: frozenset[int] = frozenset({SVARITA, ANUDATTA}) | frozenset(VEDIC_EXTENSIONS)

#: Danda and double danda verse punctuation.
DANDA = 0x0964
DOUBLE_DANDA = 0x0965
DANDAS: frozenset[int] = frozenset({DANDA, DOUBLE_DANDA})

VIRAMA = 0x094D

#: Format controls that bind to the preceding conjunct (ZWNJ, ZWJ).
_JOIN_CONTROLS = frozenset({0x200C, 0x200D})

#: Marks that look like accent candidates; used only to warn when one is
#: encountered outside the configured inventory.
_ACCENT_LIKE = frozenset({0x0951, 0x0952, 0x0953, 0x0954}) | frozenset(VEDIC_EXTENSIONS)

_COMBINING_CATEGORIES = ("Mn", "Mc", "Me")


def parse_inventory(codepoints: Iterable[str | int]) -> frozenset[int]:
    """Build an accent inventory from hexadecimal codepoint strings or ints.

    Accepts entries like ``"0951"``, ``"0x1CD0"``, ``"1CD0-1CFF"`` (an
    inclusive range), or plain integers.
    """
    out: set[int] = set()
    for entry in codepoints:
        if isinstance(entry, int):
            out.add(entry)
            continue
        text = entry.strip().lower().replace("0x", "")
        if "-" in text:
            lo, hi = text.split("-", 1)
            out.update(range(int(lo, 16), int(hi, 16) + 1))
        else:
            out.add(int(text, 16))
    if not out:
        raise ContractError("accent inventory must not be empty")
    return frozenset(out)


@dataclass(frozen=True, order=True)
class AccentMark:
    """A single accent codepoint, validated against an inventory at construction."""

    codepoint: int

    def __post_init__(self) -> None:
        if not isinstance(self.codepoint, int) or self.codepoint < 0 or self.codepoint > 0x10FFFF:
            raise ContractError(f"not a codepoint: {self.codepoint!r}")

    @classmethod
    def of(cls, codepoint: int, inventory: frozenset[int] = DEFAULT_INVENTORY) -> "AccentMark":
        if codepoint not in inventory:
            raise ContractError(
                f"U+{codepoint:04X} is not in the accent inventory ({len(inventory)} codepoints)"
            )
        return cls(codepoint)

    @property
    def char(self) -> str:
        return chr(self.codepoint)


@dataclass(frozen=True)
class AccentTag:
    """The (possibly empty) set of accent marks on one grapheme cluster.

    Codepoints are stored sorted ascending as a canonical set
    representation, so two tags compare equal iff the rendered cluster
    text is NFC-equal (NFC itself orders U+0952 before U+0951; emission
    order is handled by normalizing at application time).  The empty tag
    means an unaccented cluster.
    """

    codepoints: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        cps = tuple(sorted(self.codepoints))
        if len(set(cps)) != len(cps):
            raise ContractError(f"duplicate accent codepoint in tag: {self.codepoints!r}")
        object.__setattr__(self, "codepoints", cps)

    @classmethod
    def of(cls, codepoints: Iterable[int], inventory: frozenset[int] = DEFAULT_INVENTORY) -> "AccentTag":
        cps = tuple(codepoints)
        for cp in cps:
            if cp not in inventory:
                raise ContractError(f"U+{cp:04X} is not in the accent inventory")
        return cls(cps)

    @property
    def is_empty(self) -> bool:
        return not self.codepoints

    @property
    def marks(self) -> tuple[AccentMark, ...]:
        return tuple(AccentMark(cp) for cp in self.codepoints)

    def text(self) -> str:
        return "".join(chr(cp) for cp in self.codepoints)

    def __str__(self) -> str:  # readable in logs and error reports
        if not self.codepoints:
            return "EMPTY"
        return "+".join(f"U+{cp:04X}" for cp in self.codepoints)


EMPTY_TAG = AccentTag(())


@dataclass(frozen=True)
class GraphemeCluster:
    """One segmented cluster: base text plus its accent marks in source order."""

    base: str
    accents: tuple[int, ...] = ()
    offset: int = 0  # codepoint offset of the cluster start in the source text

    @property
    def text(self) -> str:
        return self.base + "".join(chr(cp) for cp in self.accents)

    @property
    def is_whitespace(self) -> bool:
        return len(self.base) == 1 and self.base.isspace()

    @property
    def is_danda(self) -> bool:
        return len(self.base) == 1 and ord(self.base) in DANDAS

    @property
    def is_punct(self) -> bool:
        """True for the cluster kinds that must never carry accents."""
        return self.is_whitespace or self.is_danda

    def tag(self) -> AccentTag:
        return AccentTag(self.accents)


#: A per-cluster accent tag sequence, parallel to a segmentation.
LabelSequence = tuple[AccentTag, ...]


def normalize(text: str) -> str:
    """Return the NFC normalization of ``text`` (idempotent)."""
    return unicodedata.normalize("NFC", text)


def _is_combining(ch: str) -> bool:
    return unicodedata.category(ch) in _COMBINING_CATEGORIES


def _ccc(cp: int) -> int:
    return unicodedata.combining(chr(cp))


def canonical_mark_sequence(codepoints: Iterable[int]) -> tuple[int, ...]:
    """Order accent codepoints as NFC renders them when emitted in ascending
    codepoint order: sort ascending, then stable-sort each run of nonzero
    combining classes by class (ccc 0 codepoints block reordering)."""
    out: list[int] = []
    run: list[int] = []
    for cp in sorted(codepoints):
        if _ccc(cp) == 0:
            out.extend(sorted(run, key=_ccc))
            run = []
            out.append(cp)
        else:
            run.append(cp)
    out.extend(sorted(run, key=_ccc))
    return tuple(out)


def segment(
    text: str,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
    strict: bool = True,
) -> list[GraphemeCluster]:
    """Split NFC text into grapheme clusters with their accent marks.

    A cluster is either a single whitespace/danda codepoint, or a base
    character plus its combining marks, with virama-joined consonants kept
    in one cluster.  Accent-inventory codepoints attach to the cluster as
    accents; all other combining marks are part of the base.

    Parameters
    ----------
    text : str
        Input text in NFC form (callers normalize first).
    inventory : frozenset[int]
        Codepoints treated as accent marks.
    strict : bool, default True
        If True, raise :class:`StructuralTextError` for accents with no
        preceding base (start of text or after whitespace/danda) and for
        base combining marks appearing after accent marks.  If False,
        such positions become clusters with an empty base so that metric
        code can stay total over arbitrary hypothesis strings.

    Returns
    -------
    list[GraphemeCluster]
        Clusters in source order; concatenating ``cluster.text`` restores
        the input exactly.
    """
    clusters: list[GraphemeCluster] = []
    n = len(text)
    i = 0
    while i < n:
        cp = ord(text[i])
        if cp in inventory:
            # An accent here has no base cluster to attach to.
            if strict:
                raise StructuralTextError("accent mark with no preceding base cluster", offset=i)
            start = i
            accents = [cp]
            i += 1
            while i < n and ord(text[i]) in inventory:
                accents.append(ord(text[i]))
                i += 1
            clusters.append(GraphemeCluster("", tuple(accents), offset=start))
            continue
        ch = text[i]
        if ch.isspace() or cp in DANDAS:
            clusters.append(GraphemeCluster(ch, (), offset=i))
            i += 1
            continue
        # Base cluster: leading character, then combining marks / accents /
        # virama-joined continuation.
        start = i
        base = [ch]
        accents: list[int] = []
        accent_start = -1
        pending_virama = cp == VIRAMA  # degenerate but possible in noisy text
        i += 1
        while i < n:
            ch2 = text[i]
            cp2 = ord(ch2)
            if cp2 in inventory:
                if accent_start < 0:
                    accent_start = i
                accents.append(cp2)
                i += 1
                continue
            if cp2 in _JOIN_CONTROLS and pending_virama:
                base.append(ch2)
                i += 1
                continue
            if _is_combining(ch2):
                if accents:
                    if strict:
                        raise StructuralTextError(
                            "combining mark follows accent marks within a cluster", offset=i
                        )
                    break  # lenient: start a fresh cluster
                if cp2 in _ACCENT_LIKE:
                    logger.warning(
                        "out-of-inventory accent-like mark U+%04X at offset %d kept as base mark",
                        cp2,
                        i,
                    )
                base.append(ch2)
                pending_virama = cp2 == VIRAMA
                i += 1
                continue
            if (
                pending_virama
                and not accents
                and not ch2.isspace()
                and cp2 not in DANDAS
                and unicodedata.category(ch2).startswith("L")
            ):
                # Conjunct: virama joins the next letter into this cluster.
                base.append(ch2)
                pending_virama = False
                i += 1
                continue
            break
        if strict and accents:
            if len(set(accents)) != len(accents):
                raise StructuralTextError("duplicate accent mark on one cluster", offset=accent_start)
            if tuple(accents) != canonical_mark_sequence(accents):
                raise StructuralTextError(
                    "accent marks not in ascending-codepoint canonical order", offset=accent_start
                )
        clusters.append(GraphemeCluster("".join(base), tuple(accents), offset=start))
    return clusters


def strip_accents(text: str, inventory: frozenset[int] = DEFAULT_INVENTORY) -> str:
    """Remove every accent-inventory codepoint; all other text is untouched.

    Idempotent; preserves whitespace, punctuation, and non-accent combining
    marks exactly.
    """
    return "".join(ch for ch in text if ord(ch) not in inventory)


def extract_labels(
    accented: str,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> tuple[str, LabelSequence]:
    """Split accented NFC text into unaccented text plus a per-cluster tag sequence.

    Returns ``(unaccented, labels)`` where ``unaccented`` equals
    ``strip_accents(accented)`` and ``labels`` has exactly one
    :class:`AccentTag` per grapheme cluster (whitespace and danda clusters
    always get the empty tag).  Raises :class:`StructuralTextError` on
    stray accents.
    """
    clusters = segment(accented, inventory=inventory, strict=True)
    unaccented = "".join(c.base for c in clusters)
    labels = tuple(c.tag() for c in clusters)
    return unaccented, labels


def apply_labels(
    unaccented: str,
    labels: Sequence[AccentTag],
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> str:
    """Reattach per-cluster accent tags to unaccented text.

    Inverse of :func:`extract_labels`: for well-formed accented text ``s``,
    ``apply_labels(*extract_labels(s)) == s``.

    Raises
    ------
    ContractError
        If ``unaccented`` still contains accent marks, or ``labels`` does
        not have exactly one tag per cluster.
    StructuralTextError
        If a non-empty tag lands on a whitespace or danda cluster.
    """
    clusters = segment(unaccented, inventory=inventory, strict=True)
    for c in clusters:
        if c.accents:
            raise ContractError(
                f"unaccented input already carries accent marks at offset {c.offset}"
            )
    if len(labels) != len(clusters):
        raise ContractError(
            f"label count {len(labels)} does not match cluster count {len(clusters)}"
        )
    parts: list[str] = []
    for cluster, tag in zip(clusters, labels):
        if cluster.is_punct and not tag.is_empty:
            raise StructuralTextError(
                f"accent tag {tag} on {'whitespace' if cluster.is_whitespace else 'danda'} cluster",
                offset=cluster.offset,
            )
        for cp in tag.codepoints:
            if cp not in inventory:
                raise ContractError(f"tag codepoint U+{cp:04X} is not in the accent inventory")
        parts.append(cluster.base + tag.text())
    return normalize("".join(parts))


def cluster_texts(text: str, inventory: frozenset[int] = DEFAULT_INVENTORY) -> list[str]:
    """Convenience: the rendered text of each cluster of ``text``."""
    return [c.text for c in segment(text, inventory=inventory)]


def iter_verse_lines(lines: Iterable[str]) -> Iterator[str]:
    """Normalize an iterable of text lines, dropping trailing newlines only."""
    for line in lines:
        yield normalize(line.rstrip("\n"))
