"""Counter-style random stream derivation.

Every token gets its own stream keyed by ``(seed, segment, token)``, so
output never depends on processing order or worker count.
"""

from __future__ import annotations

import hashlib
import random
import struct

_MASK64 = 2**64 - 1


def derive_seed(*parts: int | str) -> int:
    """Hash an arbitrary tuple of ints/strings to a 64-bit seed."""
    h = hashlib.blake2b(digest_size=8, person=b"typobench-seed")
    for part in parts:
        if isinstance(part, str):
            raw = part.encode("utf-8")
            h.update(b"s" + struct.pack("<Q", len(raw)) + raw)
        else:
            h.update(b"i" + struct.pack("<Q", int(part) & _MASK64))
    return int.from_bytes(h.digest(), "little")


def derive_rng(seed: int, segment_index: int, token_index: int) -> random.Random:
    """Independent stream for one token; a pure function of the triple."""
    h = hashlib.blake2b(
        struct.pack("<QQQ", seed & _MASK64, segment_index & _MASK64, token_index & _MASK64),
        digest_size=32,
        person=b"typobench-tok",
    )
    return random.Random(int.from_bytes(h.digest(), "little"))
