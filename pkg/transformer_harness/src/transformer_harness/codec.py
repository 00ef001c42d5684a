"""Byte-level id codec.

The reference byte-level models map UTF-8 byte b to token id b + 3, with
0 = pad, 1 = end of sequence, 2 = unk; ids from 259 up are sentinel tokens
that never decode to text. Implementing the mapping directly keeps the
package independent of tokenizer classes while staying id-compatible with
the reference checkpoints.
"""

from __future__ import annotations

from .errors import HarnessError

PAD_ID = 0
EOS_ID = 1
BYTE_OFFSET = 3
FIRST_SENTINEL = 259  # 256 byte ids + 3 specials


class InvalidByteOutput(HarnessError):
    """Generated ids decode to a byte sequence that is not valid UTF-8."""


def encode(text: str) -> list[int]:
    """Token ids for a verse: its UTF-8 bytes plus a closing EOS."""
    return [b + BYTE_OFFSET for b in text.encode("utf-8")] + [EOS_ID]


def decode(ids: list[int]) -> str:
    """Text from generated ids: stop at EOS, skip specials and sentinels."""
    payload = bytearray()
    for i in ids:
        if i == EOS_ID:
            break
        if i < BYTE_OFFSET or i >= FIRST_SENTINEL:
            continue
        payload.append(i - BYTE_OFFSET)
    try:
        return payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidByteOutput(f"generated bytes are not UTF-8: {exc.reason}") from exc
