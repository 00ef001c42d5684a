"""Parallel corpus construction, validation, and deterministic stratified splits.

The exchange format is line-delimited JSON with fields id, mandala, sukta,
rc, accented, unaccented (UTF-8); TSV input with columns id, accented is
also accepted.  Splits are stratified by (mandala, verse-length quartile),
shuffled by a seeded PRNG, and rounded by largest remainder in two levels:
corpus-level targets are met exactly while every stratum stays within one
verse of its exact quota.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ContractError, RecordError, StructuralTextError
from .text import DEFAULT_INVENTORY, normalize, segment, strip_accents

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Provenance:
    """Rigveda verse address: mandala.sukta.rc."""

    mandala: int
    sukta: int
    rc: int

    def __post_init__(self) -> None:
        if not 1 <= self.mandala <= 10:
            raise ContractError(f"mandala must be in [1, 10], got {self.mandala}")
        if self.sukta < 1:
            raise ContractError(f"sukta must be positive, got {self.sukta}")
        if self.rc < 1:
            raise ContractError(f"rc must be positive, got {self.rc}")

    @property
    def id(self) -> str:
        return f"{self.mandala}.{self.sukta}.{self.rc}"

    @classmethod
    def from_id(cls, verse_id: str) -> "Provenance":
        parts = verse_id.split(".")
        if len(parts) != 3:
            raise ContractError(f"verse id must be M.S.R, got {verse_id!r}")
        try:
            m, s, r = (int(p) for p in parts)
        except ValueError as exc:
            raise ContractError(f"verse id must be numeric M.S.R, got {verse_id!r}") from exc
        return cls(m, s, r)


@dataclass(frozen=True)
class VersePair:
    """One aligned accented/unaccented verse with provenance."""

    provenance: Provenance
    accented: str
    unaccented: str
    unmarked_verse: bool = False

    @property
    def id(self) -> str:
        return self.provenance.id


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    verse_id: str
    checks: tuple[ValidationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[ValidationCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


@dataclass(frozen=True)
class SplitSet:
    """Disjoint train/dev/test verse-id lists plus the inputs that shaped them."""

    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float]
    policy: str = "verse-level"
    quartile_boundaries: tuple[float, ...] = ()

    def counts(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.dev), len(self.test))


def _first_divergence(a: str, b: str) -> int:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return min(len(a), len(b))


def ingest(
    path: str | Path,
    fmt: str = "jsonl",
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> list[tuple[Provenance, str]]:
    """Read accented source records, normalized, in source order.

    Formats: ``jsonl`` (fields mandala/sukta/rc or id, accented, optional
    unaccented cross-checked against the stripped form) and ``tsv``
    (columns id, accented).  Raises :class:`RecordError` with the 1-based
    line number for malformed records or duplicate ids.
    """
    if fmt not in ("jsonl", "tsv"):
        raise ContractError(f"unknown ingest format {fmt!r} (expected jsonl or tsv)")
    path = Path(path)
    records: list[tuple[Provenance, str]] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if fmt == "jsonl":
                parsed = _parse_jsonl_record(line, lineno, inventory)
                if parsed is None:  # _meta header line
                    continue
                prov, accented = parsed
            else:
                prov, accented = _parse_tsv_record(line, lineno)
            if prov.id in seen:
                raise RecordError(f"duplicate verse id {prov.id}", line=lineno)
            seen.add(prov.id)
            records.append((prov, normalize(accented)))
    logger.info("ingested %d records from %s", len(records), path)
    return records


def _parse_jsonl_record(
    line: str, lineno: int, inventory: frozenset[int]
) -> tuple[Provenance, str] | None:
    """Parse one corpus record; returns None for a _meta header line."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON: {exc.msg}", line=lineno) from exc
    if not isinstance(obj, dict):
        raise RecordError("record is not a JSON object", line=lineno)
    if "_meta" in obj:
        return None
    try:
        if all(k in obj for k in ("mandala", "sukta", "rc")):
            prov = Provenance(int(obj["mandala"]), int(obj["sukta"]), int(obj["rc"]))
        elif "id" in obj:
            prov = Provenance.from_id(str(obj["id"]))
        else:
            raise RecordError("missing provenance fields (mandala/sukta/rc or id)", line=lineno)
    except ContractError as exc:
        raise RecordError(str(exc), line=lineno) from exc
    if "id" in obj and str(obj["id"]) != prov.id:
        raise RecordError(f"id {obj['id']!r} disagrees with provenance {prov.id}", line=lineno)
    if "accented" not in obj:
        raise RecordError("missing accented field", line=lineno)
    accented = normalize(str(obj["accented"]))
    if "unaccented" in obj and obj["unaccented"] is not None:
        expected = strip_accents(accented, inventory)
        if normalize(str(obj["unaccented"])) != expected:
            off = _first_divergence(normalize(str(obj["unaccented"])), expected)
            raise RecordError(
                f"unaccented field diverges from stripped accented text at offset {off}",
                line=lineno,
            )
    return prov, accented


def _parse_tsv_record(line: str, lineno: int) -> tuple[Provenance, str]:
    parts = line.split("\t")
    if len(parts) != 2:
        raise RecordError(f"expected 2 tab-separated columns, got {len(parts)}", line=lineno)
    verse_id, accented = parts
    try:
        prov = Provenance.from_id(verse_id.strip())
    except ContractError as exc:
        raise RecordError(str(exc), line=lineno) from exc
    return prov, accented


def build_pairs(
    records: Iterable[tuple[Provenance, str]],
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> list[VersePair]:
    """Derive unaccented text via strip_accents; flag verses with no marks.

    Structural errors from segmentation (stray accents and the like)
    propagate with the verse id attached.
    """
    pairs: list[VersePair] = []
    for prov, accented in records:
        try:
            segment(accented, inventory=inventory, strict=True)  # raises on stray accents
        except StructuralTextError as exc:
            raise StructuralTextError(exc.message, exc.offset, verse_id=prov.id) from exc
        unaccented = strip_accents(accented, inventory)
        has_marks = any(ord(ch) in inventory for ch in accented)
        pairs.append(
            VersePair(
                provenance=prov,
                accented=accented,
                unaccented=unaccented,
                unmarked_verse=not has_marks,
            )
        )
    return pairs


def validate_pair(
    pair: VersePair,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> ValidationReport:
    """Check strip-consistency, normalization fixpoint, stray marks, provenance.

    Never raises; failures are report entries.
    """
    checks: list[ValidationCheck] = []

    stripped = strip_accents(normalize(pair.accented), inventory)
    if stripped == pair.unaccented:
        checks.append(ValidationCheck("strip-consistency", True))
    else:
        off = _first_divergence(stripped, pair.unaccented)
        checks.append(
            ValidationCheck(
                "strip-consistency",
                False,
                f"first divergence at offset {off}",
            )
        )

    norm_ok = normalize(pair.accented) == pair.accented and normalize(pair.unaccented) == pair.unaccented
    checks.append(
        ValidationCheck(
            "normalization-fixpoint",
            norm_ok,
            "" if norm_ok else "field is not NFC-normalized",
        )
    )

    try:
        segment(pair.accented, inventory=inventory, strict=True)
        checks.append(ValidationCheck("stray-marks", True))
    except Exception as exc:  # StructuralTextError carries the offset
        checks.append(ValidationCheck("stray-marks", False, str(exc)))

    prov_ok = 1 <= pair.provenance.mandala <= 10 and pair.provenance.sukta >= 1 and pair.provenance.rc >= 1
    checks.append(
        ValidationCheck(
            "provenance-range",
            prov_ok,
            "" if prov_ok else f"bad provenance {pair.provenance}",
        )
    )
    return ValidationReport(verse_id=pair.id, checks=tuple(checks))


def _largest_remainder(total: int, ratios: Sequence[float]) -> list[int]:
    """Integer allocation of ``total`` by ratios: floors, then +1 by largest
    fractional remainder (ties broken by position)."""
    quotas = [total * r for r in ratios]
    counts = [int(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def _verse_length(pair: VersePair, inventory: frozenset[int]) -> int:
    return len(segment(pair.unaccented, inventory=inventory, strict=True))


def stratified_split(
    pairs: Sequence[VersePair],
    ratios: tuple[float, float, float],
    seed: int,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> SplitSet:
    """Deterministic stratified split by (mandala, verse-length quartile).

    Verse lengths are cluster counts; quartile boundaries come from the
    whole corpus, so degenerate corpora simply merge bins.  Within each
    stratum, ids are shuffled by a PRNG seeded from ``seed`` and allocated
    by largest-remainder rounding; a second rounding level reconciles
    per-stratum counts with the corpus-level largest-remainder targets so
    total split sizes are exact while each stratum stays within one verse
    of its exact quota.
    """
    if not pairs:
        raise ContractError("cannot split an empty corpus")
    if abs(sum(ratios) - 1.0) > RATIO_TOLERANCE:
        raise ContractError(f"ratios must sum to 1, got {sum(ratios)}")
    if any(r < 0 for r in ratios):
        raise ContractError(f"ratios must be nonnegative, got {ratios}")
    ids = [p.id for p in pairs]
    if len(set(ids)) != len(ids):
        raise ContractError("duplicate verse ids in corpus")

    import numpy as np

    lengths = {p.id: _verse_length(p, inventory) for p in pairs}
    boundaries = tuple(float(q) for q in np.percentile(sorted(lengths.values()), [25, 50, 75]))

    def length_bin(n: int) -> int:
        return sum(n > b for b in boundaries)

    strata: dict[tuple[int, int], list[str]] = {}
    for p in pairs:
        key = (p.provenance.mandala, length_bin(lengths[p.id]))
        strata.setdefault(key, []).append(p.id)

    stratum_keys = sorted(strata)
    n_total = len(pairs)
    n_splits = len(ratios)
    global_targets = _largest_remainder(n_total, ratios)

    rng = np.random.default_rng(seed)
    shuffled: dict[tuple[int, int], list[str]] = {}
    floors: dict[tuple[int, int], list[int]] = {}
    fracs: dict[tuple[int, int], list[float]] = {}
    for key in stratum_keys:
        members = strata[key]
        perm = rng.permutation(len(members))
        shuffled[key] = [members[int(i)] for i in perm]
        quotas = [len(members) * r for r in ratios]
        floors[key] = [int(q) for q in quotas]
        fracs[key] = [q - f for q, f in zip(quotas, floors[key])]

    row_need = {key: len(strata[key]) - sum(floors[key]) for key in stratum_keys}
    col_need = [t - sum(floors[key][i] for key in stratum_keys) for i, t in enumerate(global_targets)]
    if any(c < 0 for c in col_need):  # cannot happen: floors never exceed targets
        raise AssertionError(f"negative column need {col_need}")

    extras = {key: [0] * n_splits for key in stratum_keys}
    key_order = {key: k for k, key in enumerate(stratum_keys)}
    cells = sorted(
        ((key, i) for key in stratum_keys for i in range(n_splits)),
        key=lambda cell: (-fracs[cell[0]][cell[1]], key_order[cell[0]], cell[1]),
    )
    for key, i in cells:
        if row_need[key] > 0 and col_need[i] > 0 and extras[key][i] == 0:
            extras[key][i] = 1
            row_need[key] -= 1
            col_need[i] -= 1
    # Repair pass: a stratum may still need a unit while the only open
    # column already holds its extra; swap with another stratum.
    for key in stratum_keys:
        while row_need[key] > 0:
            open_cols = [i for i in range(n_splits) if col_need[i] > 0]
            placed = False
            for i in open_cols:
                if extras[key][i] == 0:
                    extras[key][i] = 1
                    row_need[key] -= 1
                    col_need[i] -= 1
                    placed = True
                    break
            if placed:
                continue
            swapped = False
            for i in open_cols:
                for other in stratum_keys:
                    if other == key or extras[other][i] != 0:
                        continue
                    for j in range(n_splits):
                        if extras[other][j] == 1 and extras[key][j] == 0:
                            extras[other][j] = 0
                            extras[other][i] = 1
                            extras[key][j] = 1
                            row_need[key] -= 1
                            col_need[i] -= 1
                            swapped = True
                            break
                    if swapped:
                        break
                if swapped:
                    break
            if not swapped:
                raise AssertionError("split reconciliation failed to converge")

    split_ids: list[list[str]] = [[] for _ in range(n_splits)]
    for key in stratum_keys:
        counts = [floors[key][i] + extras[key][i] for i in range(n_splits)]
        members = shuffled[key]
        pos = 0
        for i in range(n_splits):
            split_ids[i].extend(members[pos : pos + counts[i]])
            pos += counts[i]

    train, dev, test = (tuple(s) for s in split_ids)
    got = (len(train), len(dev), len(test))
    if list(got) != global_targets:
        raise AssertionError(f"split counts {got} != targets {global_targets}")
    return SplitSet(
        train=train,
        dev=dev,
        test=test,
        seed=seed,
        ratios=tuple(ratios),
        quartile_boundaries=boundaries,
    )


def pair_to_json_dict(pair: VersePair) -> dict:
    return {
        "id": pair.id,
        "mandala": pair.provenance.mandala,
        "sukta": pair.provenance.sukta,
        "rc": pair.provenance.rc,
        "accented": pair.accented,
        "unaccented": pair.unaccented,
        "unmarkedVerse": pair.unmarked_verse,
    }


def write_corpus(pairs: Iterable[VersePair], path: str | Path, meta: dict | None = None) -> None:
    """Write the line-delimited JSON corpus file (optional _meta first line)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, ensure_ascii=False, sort_keys=True) + "\n")
        for pair in pairs:
            fh.write(json.dumps(pair_to_json_dict(pair), ensure_ascii=False, sort_keys=True) + "\n")


def read_corpus(
    path: str | Path,
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> list[VersePair]:
    """Read a corpus exchange file back into validated pairs."""
    path = Path(path)
    pairs: list[VersePair] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parsed = _parse_jsonl_record(line, lineno, inventory)
            if parsed is None:
                continue
            prov, accented = parsed
            if prov.id in seen:
                raise RecordError(f"duplicate verse id {prov.id}", line=lineno)
            seen.add(prov.id)
            unaccented = strip_accents(accented, inventory)
            has_marks = any(ord(ch) in inventory for ch in accented)
            pairs.append(VersePair(prov, accented, unaccented, unmarked_verse=not has_marks))
    return pairs


def write_manifest(split: SplitSet, path: str | Path, meta: dict | None = None) -> None:
    doc = {
        "seed": split.seed,
        "ratios": list(split.ratios),
        "policy": split.policy,
        "quartileBoundaries": list(split.quartile_boundaries),
        "counts": {"train": len(split.train), "dev": len(split.dev), "test": len(split.test)},
        "train": list(split.train),
        "dev": list(split.dev),
        "test": list(split.test),
    }
    if meta is not None:
        doc["_meta"] = meta
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> SplitSet:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return SplitSet(
            train=tuple(doc["train"]),
            dev=tuple(doc["dev"]),
            test=tuple(doc["test"]),
            seed=int(doc["seed"]),
            ratios=tuple(float(r) for r in doc["ratios"]),
            policy=str(doc.get("policy", "verse-level")),
            quartile_boundaries=tuple(float(b) for b in doc.get("quartileBoundaries", ())),
        )
    except KeyError as exc:
        raise ContractError(f"manifest missing field {exc}") from exc


def write_hypotheses(
    rows: Iterable[tuple[str, str]], path: str | Path, meta: dict | None = None
) -> None:
    """Hypothesis exchange file: line-delimited JSON {id, accented}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, ensure_ascii=False, sort_keys=True) + "\n")
        for verse_id, accented in rows:
            fh.write(
                json.dumps({"id": verse_id, "accented": accented}, ensure_ascii=False, sort_keys=True)
                + "\n"
            )


def read_hypotheses(path: str | Path) -> list[tuple[str, str]]:
    """Read (id, accented) rows; also accepts full corpus files."""
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(doc, dict):
                raise RecordError("record is not a JSON object", line=lineno)
            if "_meta" in doc:
                continue
            if "id" not in doc or "accented" not in doc:
                raise RecordError("record needs `id` and `accented` fields", line=lineno)
            verse_id = str(doc["id"])
            if verse_id in seen:
                raise RecordError(f"duplicate verse id {verse_id}", line=lineno)
            seen.add(verse_id)
            rows.append((verse_id, normalize(str(doc["accented"]))))
    return rows
