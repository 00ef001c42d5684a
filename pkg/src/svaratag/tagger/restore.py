"""Accent restoration: unaccented verse in, accented verse out.

Pipeline per verse: strict segmentation, cluster-to-id lookup (unseen
clusters map to UNK), Viterbi decoding with the empty tag pinned on
whitespace/danda positions, then tag reattachment. Base graphemes are
preserved by construction; the model only chooses tags.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from ..errors import StructuralTextError
from ..text import AccentTag, apply_labels, normalize, segment
from .checkpoint import Checkpoint, load_checkpoint
from .model import decode


class AccentRestorer:
    """Decodes verses with a trained checkpoint.

    Stateless across calls; one instance may serve many verses.
    """

    def __init__(self, checkpoint: Checkpoint) -> None:
        self.checkpoint = checkpoint

    @classmethod
    def from_file(cls, path: str | Path) -> "AccentRestorer":
        return cls(load_checkpoint(path))

    def restore_verse(self, unaccented: str) -> str:
        """Predict and attach accent marks to one unaccented verse.

        The input must not already carry accent marks; structural problems
        surface as :class:`StructuralTextError` with an offset.
        """
        ckpt = self.checkpoint
        text = normalize(unaccented)
        clusters = segment(text, inventory=ckpt.inventory, strict=True)
        for c in clusters:
            if c.accents:
                raise StructuralTextError(
                    "input verse already carries accent marks", offset=c.offset
                )
        if not clusters:
            return text
        ids = ckpt.vocab.encode([c.base for c in clusters])
        forced = {i for i, c in enumerate(clusters) if c.is_punct}
        path = decode(
            ckpt.params,
            ids,
            forced_empty_positions=forced,
            empty_tag_id=ckpt.tags.empty_id,
        )
        labels = [ckpt.tags.id_to_tag[tag_id] for tag_id in path]
        return apply_labels(text, labels, inventory=ckpt.inventory)

    def restore_many(self, verses: Iterable[str]) -> list[str]:
        return [self.restore_verse(v) for v in verses]

    def decode_tags(self, unaccented: str) -> list[AccentTag]:
        """The predicted tag sequence without reattachment (for analysis)."""
        ckpt = self.checkpoint
        clusters = segment(normalize(unaccented), inventory=ckpt.inventory, strict=True)
        if not clusters:
            return []
        ids = ckpt.vocab.encode([c.base for c in clusters])
        forced = {i for i, c in enumerate(clusters) if c.is_punct}
        path = decode(ckpt.params, ids, forced, ckpt.tags.empty_id)
        return [ckpt.tags.id_to_tag[t] for t in path]


def restore_file_lines(
    restorer: AccentRestorer, lines: Sequence[str]
) -> list[str]:
    """Restore a batch of plain-text lines, preserving order."""
    return restorer.restore_many(lines)
