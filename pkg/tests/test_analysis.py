"""Error taxonomy: hand traces, pairing rules, conservation, correlations."""

from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np
import pytest

from gen import random_verse
from svaratag.analysis import (
    CATEGORIES,
    ClassifiedError,
    aggregate,
    analyze_corpus,
    classify_errors,
    distribution_table,
    metric_correlation,
)
from svaratag.errors import ContractError
from svaratag.metrics import corpus_report
from svaratag.text import ANUDATTA, SVARITA, AccentTag, strip_accents

DATA = Path(__file__).parent / "data"
AN = chr(ANUDATTA)
SV = chr(SVARITA)
AN_TAG = AccentTag((ANUDATTA,))
SV_TAG = AccentTag((SVARITA,))


def cats(result) -> list[str]:
    return [e.category for e in result.errors]


def conserved(result) -> bool:
    counts = aggregate(result.errors).counts
    lhs = (
        2 * (counts["misplacement"] + counts["boundary"])
        + counts["omission"]
        + counts["overgeneration"]
        + counts["type_confusion"]
        + result.unclassified
    )
    return lhs == result.diff_positions


class TestClassify:
    def test_identical_strings_no_errors(self):
        r = classify_errors(f"क{AN}ख ग", f"क{AN}ख ग")
        assert r.errors == ()
        assert r.diff_positions == 0
        assert r.unclassified == 0

    def test_shift_by_one_is_misplacement(self):
        # Mark on cluster 0 in ref, same mark on cluster 1 in hyp.
        r = classify_errors(f"क{AN}ख ग", f"कख{AN} ग")
        assert cats(r) == ["misplacement"]
        e = r.errors[0]
        assert (e.ref_position, e.hyp_position, e.distance) == (0, 1, 1)
        assert e.ref_tag == e.hyp_tag == AN_TAG
        assert conserved(r)

    def test_same_position_swap_is_type_confusion(self):
        r = classify_errors(f"क{AN}ख", f"क{SV}ख")
        assert cats(r) == ["type_confusion"]
        e = r.errors[0]
        assert e.ref_position == e.hyp_position == 0
        assert (e.ref_tag, e.hyp_tag) == (AN_TAG, SV_TAG)
        assert conserved(r)

    def test_unmatched_deletion_is_omission(self):
        r = classify_errors(f"क{AN}ख ग", "कख ग")
        assert cats(r) == ["omission"]
        assert r.errors[0].ref_position == 0
        assert r.errors[0].hyp_position is None

    def test_unmatched_insertion_is_overgeneration(self):
        r = classify_errors("कख ग", f"कख ग{SV}")
        assert cats(r) == ["overgeneration"]
        assert r.errors[0].hyp_position == 3
        assert r.errors[0].ref_position is None

    def test_straddling_whitespace_is_boundary(self):
        r = classify_errors(f"क{AN} ख", f"क ख{AN}")
        assert cats(r) == ["boundary"]
        assert r.errors[0].distance == 2

    def test_straddling_danda_is_boundary(self):
        r = classify_errors(f"क{AN}।ख", f"क।ख{AN}")
        assert cats(r) == ["boundary"]

    def test_adjacent_shift_is_not_boundary(self):
        # Nothing between positions 0 and 1.
        r = classify_errors(f"क{AN}ख", f"कख{AN}")
        assert cats(r) == ["misplacement"]

    def test_beyond_window_splits_into_omission_and_overgeneration(self):
        r = classify_errors(f"क{AN}खगघ", f"कखगघ{AN}")
        assert sorted(cats(r)) == ["omission", "overgeneration"]
        assert conserved(r)

    def test_wider_window_pairs_the_same_shift(self):
        r = classify_errors(f"क{AN}खगघ", f"कखगघ{AN}", window=3)
        assert cats(r) == ["misplacement"]
        assert r.errors[0].distance == 3

    def test_different_marks_do_not_pair(self):
        r = classify_errors(f"क{AN}ख", f"कख{SV}")
        assert sorted(cats(r)) == ["omission", "overgeneration"]

    def test_nearest_first_leftmost_tie_break(self):
        # Deletion at 2, insertions at 1 and 3: both distance 1, the pair
        # whose leftmost position is smaller wins, leaving 3 unpaired.
        r = classify_errors(f"कखग{AN}घ", f"कख{AN}गघ{AN}")
        by_cat = {e.category: e for e in r.errors}
        assert sorted(cats(r)) == ["misplacement", "overgeneration"]
        assert by_cat["misplacement"].hyp_position == 1
        assert by_cat["overgeneration"].hyp_position == 3
        assert conserved(r)

    def test_two_deletions_one_insertion(self):
        r = classify_errors(f"क{AN}खग{AN}", f"कख{AN}ग")
        by_cat = {e.category: e for e in r.errors}
        assert sorted(cats(r)) == ["misplacement", "omission"]
        assert by_cat["misplacement"].ref_position == 0
        assert by_cat["omission"].ref_position == 2

    def test_divergent_bases_counted_unclassified(self):
        r = classify_errors(f"क{AN} ख", "ग ख")
        assert r.errors == ()
        assert r.unclassified == 1
        assert r.diff_positions == 1

    def test_verse_id_attached(self):
        r = classify_errors(f"क{AN}ख", "कख", verse_id="3.4.5")
        assert r.errors[0].verse_id == "3.4.5"

    def test_window_must_be_positive(self):
        with pytest.raises(ContractError):
            classify_errors("क", "क", window=0)


class TestInvariantViolationsRejected:
    def test_misplacement_needs_distance(self):
        with pytest.raises(ContractError):
            ClassifiedError("x", "misplacement", 1, 1, AN_TAG, AN_TAG, distance=0)

    def test_omission_must_not_carry_hyp_position(self):
        with pytest.raises(ContractError):
            ClassifiedError("x", "omission", 1, 2, AN_TAG, AccentTag(()))

    def test_confusion_requires_distinct_nonempty_tags(self):
        with pytest.raises(ContractError):
            ClassifiedError("x", "type_confusion", 1, 1, AN_TAG, AN_TAG)
        with pytest.raises(ContractError):
            ClassifiedError("x", "type_confusion", 1, 1, AccentTag(()), AN_TAG)

    def test_unknown_category_rejected(self):
        with pytest.raises(ContractError):
            ClassifiedError("x", "mystery", 1, 1, AN_TAG, SV_TAG)


class TestAggregate:
    def test_empty_input_zero_totals(self):
        dist = aggregate([])
        assert dist.total == 0
        assert all(v == 0 for v in dist.counts.values())
        assert all(v == 0.0 for v in dist.shares.values())

    def test_three_to_one_shares(self):
        errors = [
            ClassifiedError("v", "misplacement", 0, 1, AN_TAG, AN_TAG, distance=1),
            ClassifiedError("v", "misplacement", 2, 3, AN_TAG, AN_TAG, distance=1),
            ClassifiedError("v", "misplacement", 4, 5, AN_TAG, AN_TAG, distance=1),
            ClassifiedError("v", "omission", 6, None, AN_TAG, AccentTag(())),
        ]
        dist = aggregate(errors)
        assert dist.counts["misplacement"] == 3
        assert dist.shares["misplacement"] == pytest.approx(75.0)
        assert dist.shares["omission"] == pytest.approx(25.0)

    def test_shares_sum_to_100(self):
        errors = [
            ClassifiedError("v", "omission", i, None, AN_TAG, AccentTag(()))
            for i in range(3)
        ] + [
            ClassifiedError("v", "overgeneration", None, i, AccentTag(()), SV_TAG)
            for i in range(4)
        ]
        dist = aggregate(errors)
        assert sum(dist.shares.values()) == pytest.approx(100.0)


@pytest.fixture(scope="module")
def fixture_rows():
    rows = []
    with (DATA / "analysis_fixture.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            rows.append(json.loads(line))
    return rows


@pytest.fixture(scope="module")
def expected():
    with (DATA / "analysis_expected.json").open(encoding="utf-8") as fh:
        return json.load(fh)


class TestFixtureFile:
    def test_distribution_matches_expectation_file(self, fixture_rows, expected):
        refs = [(r["id"], r["ref"]) for r in fixture_rows]
        hyps = [(r["id"], r["hyp"]) for r in fixture_rows]
        analysis = analyze_corpus(refs, hyps)
        assert dict(analysis.distribution.counts) == expected["counts"]
        assert analysis.distribution.total == expected["total"]
        assert analysis.unclassified == expected["unclassified"]
        assert analysis.diff_positions == expected["diffPositions"]
        for cat, share in expected["shares"].items():
            assert analysis.distribution.shares[cat] == pytest.approx(share)

    def test_fixture_conserves_error_mass(self, fixture_rows):
        for row in fixture_rows:
            r = classify_errors(row["ref"], row["hyp"], verse_id=row["id"])
            assert conserved(r), row["id"]

    def test_table_lists_every_category(self, fixture_rows):
        refs = [(r["id"], r["ref"]) for r in fixture_rows]
        hyps = [(r["id"], r["hyp"]) for r in fixture_rows]
        table = distribution_table(analyze_corpus(refs, hyps))
        for cat in CATEGORIES:
            assert cat in table
        assert "unclassified" in table


class TestConservationProperty:
    def test_random_corruptions_conserve(self):
        # Corrupt random accented verses by dropping/adding/moving marks and
        # check conservation on each classified verse.
        rng = random.Random(11)
        for _ in range(200):
            ref = random_verse(rng)
            plain = strip_accents(ref)
            hyp = random_verse(rng, accent_prob=0.3)
            hyp_same_base = strip_accents(hyp) == plain
            r = classify_errors(ref, hyp if hyp_same_base else plain)
            assert conserved(r)

    def test_classification_deterministic(self):
        ref = f"क{AN}खग{AN}घ च{SV}"
        hyp = f"कख{AN}गघ{AN} च"
        a = classify_errors(ref, hyp)
        b = classify_errors(ref, hyp)
        assert a == b


class TestCorrelation:
    def _report(self, pairs):
        refs = [(f"1.1.{i}", r) for i, (r, _) in enumerate(pairs, 1)]
        hyps = [(f"1.1.{i}", h) for i, (_, h) in enumerate(pairs, 1)]
        return corpus_report(refs, hyps)

    def test_identical_der_cer_vectors_give_r_one(self):
        # Build verses whose per-verse DER and CER rise together.
        pairs = []
        for k in range(1, 5):
            base = " ".join([f"क{AN}"] * 4)
            hyp_words = [f"क{AN}"] * (4 - k) + ["क"] * k
            pairs.append((base, " ".join(hyp_words)))
        report = self._report(pairs)
        corr = metric_correlation(report)
        ders = [v.der.rate for v in report.per_verse]
        cers = [v.cer.rate for v in report.per_verse]
        expected = np.corrcoef(ders, cers)[0, 1]
        assert corr["derCer"].r == pytest.approx(expected)
        assert corr["derCer"].defined

    def test_constant_vector_flagged(self):
        pairs = [(f"क{AN} ख", f"क{AN} ख"), (f"ग{AN} घ", f"ग{AN} घ")]
        corr = metric_correlation(self._report(pairs))
        assert not corr["derCer"].defined
        assert corr["derCer"].flags

    def test_needs_two_verses(self):
        report = self._report([(f"क{AN}", "क")])
        with pytest.raises(ContractError):
            metric_correlation(report)

    def test_independent_vectors_have_small_r(self):
        # DER driven by mark deletions, WER driven by an unrelated pattern is
        # hard to construct by hand; instead check |r| < 1 strictly and the
        # estimate agrees with numpy's on a mixed corpus.
        rng = random.Random(3)
        pairs = []
        for _ in range(60):
            ref = random_verse(rng)
            hyp = strip_accents(ref) if rng.random() < 0.5 else ref
            pairs.append((ref, hyp))
        report = self._report(pairs)
        corr = metric_correlation(report)
        for name in ("derCer", "derWer"):
            if corr[name].defined:
                assert -1.0 <= corr[name].r <= 1.0


class TestAnalyzeCorpus:
    def test_json_payload_shape(self):
        refs = [("1.1.1", f"क{AN}ख"), ("1.1.2", f"ग{SV} घ")]
        hyps = [("1.1.1", "कख"), ("1.1.2", f"ग{SV} घ")]
        payload = analyze_corpus(refs, hyps).to_json_dict()
        assert set(payload) == {
            "distribution", "unclassified", "diffPositions",
            "correlations", "errors", "metrics",
        }
        assert payload["distribution"]["counts"]["omission"] == 1
        assert payload["errors"][0]["verseId"] == "1.1.1"
        assert payload["errors"][0]["refTag"] == ["0952"]
