"""Corpus and manifest ingestion, and the text-to-text pair files.

The corpus is JSONL with one verse object per line carrying at least
``id``, ``accented``, and ``unaccented``; the split manifest is one JSON
object with ``train``/``dev``/``test`` id lists. Lines holding a ``_meta``
key are reproducibility headers and are skipped. Pairs files produced here
are JSONL rows ``{"id", "source", "target"}`` where source is the
unaccented verse and target the accented one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import DataError

SPLIT_NAMES = ("train", "dev", "test")


@dataclass(frozen=True)
class Pair:
    verse_id: str
    source: str  # unaccented
    target: str  # accented


@dataclass(frozen=True)
class PreparedSplits:
    train: tuple[Pair, ...]
    dev: tuple[Pair, ...]
    test: tuple[Pair, ...]

    def counts(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.dev), len(self.test))


def _iter_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(doc, dict):
                raise DataError("record is not a JSON object", line=lineno)
            if "_meta" in doc:
                continue
            yield lineno, doc


def read_corpus(path: str | Path) -> dict[str, Pair]:
    """Verse id -> pair, from a corpus JSONL file."""
    pairs: dict[str, Pair] = {}
    for lineno, doc in _iter_jsonl(path):
        for field in ("id", "accented", "unaccented"):
            if field not in doc:
                raise DataError(f"corpus record needs `{field}`", line=lineno)
        verse_id = str(doc["id"])
        if verse_id in pairs:
            raise DataError(f"duplicate verse id {verse_id}", line=lineno)
        pairs[verse_id] = Pair(verse_id, str(doc["unaccented"]), str(doc["accented"]))
    return pairs


def read_manifest(path: str | Path) -> dict[str, list[str]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest is not valid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DataError("manifest must be a JSON object")
    splits: dict[str, list[str]] = {}
    for name in SPLIT_NAMES:
        ids = doc.get(name)
        if not isinstance(ids, list):
            raise DataError(f"manifest needs a `{name}` id list")
        splits[name] = [str(i) for i in ids]
    return splits


def prepare(corpus_path: str | Path, manifest_path: str | Path) -> PreparedSplits:
    """One (unaccented -> accented) pair per manifest id, split-aligned.

    Any manifest id absent from the corpus aborts: silently training on a
    subset would invalidate the split accounting.
    """
    corpus = read_corpus(corpus_path)
    manifest = read_manifest(manifest_path)
    missing = [i for name in SPLIT_NAMES for i in manifest[name] if i not in corpus]
    if missing:
        raise DataError(
            f"manifest names {len(missing)} ids absent from the corpus, first: {missing[0]}"
        )
    by_split = {
        name: tuple(corpus[i] for i in manifest[name]) for name in SPLIT_NAMES
    }
    return PreparedSplits(**by_split)


def write_pairs(pairs: Iterable[Pair], path: str | Path, meta: dict | None = None) -> None:
    lines = []
    if meta is not None:
        lines.append(json.dumps({"_meta": meta}, sort_keys=True))
    for p in pairs:
        lines.append(
            json.dumps(
                {"id": p.verse_id, "source": p.source, "target": p.target},
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_pairs(path: str | Path) -> list[Pair]:
    pairs = []
    for lineno, doc in _iter_jsonl(path):
        for field in ("id", "source", "target"):
            if field not in doc:
                raise DataError(f"pairs record needs `{field}`", line=lineno)
        pairs.append(Pair(str(doc["id"]), str(doc["source"]), str(doc["target"])))
    return pairs


def read_sources(path: str | Path) -> list[tuple[str, str]]:
    """(id, unaccented) rows for prediction.

    Accepts corpus files (``unaccented``), pairs files (``source``), and
    plain verse rows (``text``).
    """
    rows: list[tuple[str, str]] = []
    for lineno, doc in _iter_jsonl(path):
        if "id" not in doc:
            raise DataError("record needs an `id`", line=lineno)
        for field in ("unaccented", "source", "text"):
            if field in doc:
                rows.append((str(doc["id"]), str(doc[field])))
                break
        else:
            raise DataError(
                "record needs an `unaccented`, `source`, or `text` field", line=lineno
            )
    return rows
