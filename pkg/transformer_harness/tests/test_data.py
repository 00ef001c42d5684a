"""Pair preparation from corpus + manifest files."""

import json

import pytest

from conftest import write_smoke_corpus
from transformer_harness.data import Pair, prepare, read_pairs, read_sources, write_pairs
from transformer_harness.errors import DataError

INVENTORY = {0x0951, 0x0952} | set(range(0x1CD0, 0x1D00))


def strip_marks(text: str) -> str:
    # schema knowledge: unaccented == accented minus inventory codepoints
    return "".join(ch for ch in text if ord(ch) not in INVENTORY)


def write_corpus(path, rows):
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8"
    )


def test_three_verses_three_pairs(tmp_path):
    rows = [
        {"id": f"1.1.{i}", "accented": f"क॒ख{i}", "unaccented": f"कख{i}"}
        for i in range(1, 4)
    ]
    write_corpus(tmp_path / "c.jsonl", rows)
    (tmp_path / "m.json").write_text(
        json.dumps({"train": ["1.1.1", "1.1.2"], "dev": ["1.1.3"], "test": []})
    )
    splits = prepare(tmp_path / "c.jsonl", tmp_path / "m.json")
    assert splits.counts() == (2, 1, 0)
    assert splits.train[0] == Pair("1.1.1", "कख1", "क॒ख1")


def test_targets_satisfy_strip_invariant(tmp_path):
    corpus, manifest = write_smoke_corpus(tmp_path, n=40)
    splits = prepare(corpus, manifest)
    for split in (splits.train, splits.dev, splits.test):
        for pair in split:
            assert strip_marks(pair.target) == pair.source


def test_manifest_id_missing_from_corpus_aborts(tmp_path):
    write_corpus(tmp_path / "c.jsonl", [{"id": "1.1.1", "accented": "क", "unaccented": "क"}])
    (tmp_path / "m.json").write_text(
        json.dumps({"train": ["1.1.1", "9.9.9"], "dev": [], "test": []})
    )
    with pytest.raises(DataError, match="9.9.9"):
        prepare(tmp_path / "c.jsonl", tmp_path / "m.json")


def test_published_scale_pair_counts(tmp_path):
    """19,329 training pairs from a 22,740-verse corpus split 85/10/5."""
    ids = [f"{k % 10 + 1}.{k // 10 + 1}.1" for k in range(22_740)]
    rows = (
        json.dumps({"id": i, "accented": "क॒", "unaccented": "क"}) + "\n" for i in ids
    )
    (tmp_path / "c.jsonl").write_text("".join(rows), encoding="utf-8")
    (tmp_path / "m.json").write_text(
        json.dumps({"train": ids[:19_329], "dev": ids[19_329:21_603], "test": ids[21_603:]})
    )
    splits = prepare(tmp_path / "c.jsonl", tmp_path / "m.json")
    assert splits.counts() == (19_329, 2_274, 1_137)


def test_duplicate_verse_id_rejected(tmp_path):
    write_corpus(
        tmp_path / "c.jsonl",
        [
            {"id": "1.1.1", "accented": "क", "unaccented": "क"},
            {"id": "1.1.1", "accented": "ख", "unaccented": "ख"},
        ],
    )
    with pytest.raises(DataError, match="duplicate"):
        prepare(tmp_path / "c.jsonl", tmp_path / "m.json")


def test_meta_lines_skipped(tmp_path):
    (tmp_path / "c.jsonl").write_text(
        json.dumps({"_meta": {"tool": "svaratag"}})
        + "\n"
        + json.dumps({"id": "1.1.1", "accented": "क", "unaccented": "क"})
        + "\n",
        encoding="utf-8",
    )
    (tmp_path / "m.json").write_text(json.dumps({"train": ["1.1.1"], "dev": [], "test": []}))
    assert prepare(tmp_path / "c.jsonl", tmp_path / "m.json").counts() == (1, 0, 0)


def test_pairs_file_round_trip(tmp_path):
    pairs = [Pair("1.1.1", "कख", "क॒ख"), Pair("1.1.2", "ग", "ग॑")]
    write_pairs(pairs, tmp_path / "p.jsonl", meta={"command": "prepare"})
    assert read_pairs(tmp_path / "p.jsonl") == pairs


def test_read_sources_accepts_corpus_pairs_and_text_rows(tmp_path):
    (tmp_path / "mixed.jsonl").write_text(
        json.dumps({"id": "a", "unaccented": "क"})
        + "\n"
        + json.dumps({"id": "b", "source": "ख"})
        + "\n"
        + json.dumps({"id": "c", "text": "ग"})
        + "\n",
        encoding="utf-8",
    )
    assert read_sources(tmp_path / "mixed.jsonl") == [("a", "क"), ("b", "ख"), ("c", "ग")]


def test_read_sources_requires_a_text_field(tmp_path):
    (tmp_path / "bad.jsonl").write_text(json.dumps({"id": "a"}) + "\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_sources(tmp_path / "bad.jsonl")
