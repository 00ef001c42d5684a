"""Cluster vocabulary and tag set built from the training split only."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..corpus import VersePair
from ..errors import ContractError
from ..text import DEFAULT_INVENTORY, AccentTag, extract_labels, segment

logger = logging.getLogger(__name__)

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


@dataclass(frozen=True)
class Vocab:
    """Base-grapheme string to id; PAD=0 and UNK=1 are reserved."""

    cluster_to_id: dict[str, int]
    id_to_cluster: tuple[str, ...]
    counts: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.id_to_cluster)

    def id_of(self, cluster: str) -> int:
        return self.cluster_to_id.get(cluster, UNK_ID)

    def encode(self, clusters: Sequence[str]) -> list[int]:
        return [self.id_of(c) for c in clusters]

    @classmethod
    def from_clusters(cls, clusters: Iterable[str], counts: dict[str, int] | None = None) -> "Vocab":
        uniq = sorted(set(clusters))
        for reserved in (PAD_TOKEN, UNK_TOKEN):
            if reserved in uniq:
                raise ContractError(f"reserved token {reserved!r} appears as a cluster")
        id_to_cluster = (PAD_TOKEN, UNK_TOKEN, *uniq)
        cluster_to_id = {c: i for i, c in enumerate(id_to_cluster) if i >= 2}
        return cls(cluster_to_id, id_to_cluster, counts or {})


@dataclass(frozen=True)
class TagSet:
    """AccentTag to id; the empty tag is always present at id 0."""

    tag_to_id: dict[AccentTag, int]
    id_to_tag: tuple[AccentTag, ...]
    histogram: dict[AccentTag, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.id_to_tag)

    @property
    def empty_id(self) -> int:
        return self.tag_to_id[AccentTag(())]

    def id_of(self, tag: AccentTag) -> int:
        try:
            return self.tag_to_id[tag]
        except KeyError:
            raise ContractError(f"tag {tag} not in the training tag set") from None

    @classmethod
    def from_tags(cls, tags: Iterable[AccentTag], histogram: dict[AccentTag, int] | None = None) -> "TagSet":
        uniq = set(tags)
        uniq.add(AccentTag(()))
        ordered = tuple(sorted(uniq, key=lambda t: t.codepoints))  # empty sorts first
        tag_to_id = {t: i for i, t in enumerate(ordered)}
        return cls(tag_to_id, ordered, histogram or {})


def build_vocab_and_tags(
    train_pairs: Sequence[VersePair],
    inventory: frozenset[int] = DEFAULT_INVENTORY,
) -> tuple[Vocab, TagSet]:
    """Collect cluster strings and accent tags from the training split.

    Whitespace and danda clusters are vocabulary entries like any other
    (the tagger labels every position).  Ids are deterministic: clusters
    sorted lexicographically after the reserved PAD/UNK, tags sorted by
    codepoint tuple with the empty tag first.
    """
    if not train_pairs:
        raise ContractError("empty training set")
    cluster_counts: dict[str, int] = {}
    tag_hist: dict[AccentTag, int] = {}
    for pair in train_pairs:
        _, labels = extract_labels(pair.accented, inventory=inventory)
        bases = [c.base for c in segment(pair.unaccented, inventory=inventory, strict=True)]
        if len(bases) != len(labels):
            raise ContractError(
                f"verse {pair.id}: unaccented clusters {len(bases)} != labels {len(labels)}"
            )
        for b in bases:
            cluster_counts[b] = cluster_counts.get(b, 0) + 1
        for tag in labels:
            tag_hist[tag] = tag_hist.get(tag, 0) + 1
    vocab = Vocab.from_clusters(cluster_counts, cluster_counts)
    tags = TagSet.from_tags(tag_hist, tag_hist)
    logger.info(
        "vocab |V|=%d (plus pad/unk), tag set |T|=%d, %d training clusters",
        len(vocab) - 2,
        len(tags),
        sum(cluster_counts.values()),
    )
    return vocab, tags
